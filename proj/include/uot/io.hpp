#pragma once

#include <string>

#include "uot/forward.hpp"

namespace uot {

/// Field CSV: one header line "nx,ny,x0,y0,lx,ly" (values), then nx*ny lines
/// "i,j,value" in row-major order, 17 significant digits. Round-trips are
/// value-exact for finite doubles.
void write_field_csv(const NodalField& field, const std::string& path);
NodalField read_field_csv(const std::string& path);

/// Measurement CSV: one header line
/// "eta_x,eta_y,u_x0,u_y0,u_x1,u_y1,n1,n2,shape,sigma1,sigma2,provenance",
/// then rows "i,xi_x,xi_y,h". Provenance is preserved verbatim.
void write_measurements_csv(const MeasurementSet& meas,
                            const std::string& path);
MeasurementSet read_measurements_csv(const std::string& path);

enum class PgmRange { auto_range, fixed };

/// 16-bit binary PGM, [lo, hi] (or [min, max]) mapped linearly to
/// [0, 65535], row 0 at maximal y. A constant field maps to uniform
/// mid-gray with a warning on stderr; fixed-range clipping clamps.
void write_pgm(const NodalField& field, const std::string& path,
               PgmRange range = PgmRange::auto_range, double lo = 0.0,
               double hi = 0.0);

}  // namespace uot
