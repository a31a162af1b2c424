#include "uot/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "uot/errors.hpp"

namespace uot {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(what) + ": cannot parse number '" + s + "'");
  }
}

long parse_long(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(what) + ": cannot parse integer '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  return f;
}

}  // namespace

void write_field_csv(const NodalField& field, const std::string& path) {
  if (!all_finite(field)) {
    throw IoError("write_field_csv: field contains non-finite values");
  }
  const RegularGrid& g = field.grid;
  std::ofstream f = open_out(path);
  f << g.nx << ',' << g.ny << ',' << fmt_double(g.x0) << ','
    << fmt_double(g.y0) << ',' << fmt_double(g.lx) << ',' << fmt_double(g.ly)
    << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      f << i << ',' << j << ',' << fmt_double(field.at(i, j)) << '\n';
    }
  }
  if (!f) throw IoError("write_field_csv: write failed for '" + path + "'");
}

NodalField read_field_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) {
    throw IoError("read_field_csv: missing header in '" + path + "'");
  }
  auto head = split_csv(line);
  if (head.size() != 6) {
    throw IoError("read_field_csv: malformed header in '" + path + "'");
  }
  int nx = static_cast<int>(parse_long(head[0], "field header nx"));
  int ny = static_cast<int>(parse_long(head[1], "field header ny"));
  double x0 = parse_double(head[2], "field header x0");
  double y0 = parse_double(head[3], "field header y0");
  double lx = parse_double(head[4], "field header lx");
  double ly = parse_double(head[5], "field header ly");
  RegularGrid grid;
  try {
    grid = build_grid(nx, ny, x0, y0, lx, ly);
  } catch (const ConfigError& e) {
    throw IoError(std::string("read_field_csv: bad header: ") + e.what());
  }
  NodalField field(grid);
  std::vector<char> seen(grid.num_nodes(), 0);
  long rows = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 3) {
      throw IoError("read_field_csv: malformed row '" + line + "'");
    }
    long i = parse_long(cells[0], "field row i");
    long j = parse_long(cells[1], "field row j");
    double v = parse_double(cells[2], "field row value");
    if (i < 0 || i >= nx || j < 0 || j >= ny) {
      throw IoError("read_field_csv: node index out of range");
    }
    if (!std::isfinite(v)) {
      throw IoError("read_field_csv: non-finite value");
    }
    field.at(static_cast<int>(i), static_cast<int>(j)) = v;
    seen[grid.node_index(static_cast<int>(i), static_cast<int>(j))] = 1;
    ++rows;
  }
  if (rows != grid.num_nodes()) {
    throw IoError("read_field_csv: expected " +
                  std::to_string(grid.num_nodes()) + " rows, got " +
                  std::to_string(rows));
  }
  for (char s : seen) {
    if (!s) throw IoError("read_field_csv: duplicate or missing node rows");
  }
  return field;
}

void write_measurements_csv(const MeasurementSet& meas,
                            const std::string& path) {
  for (double v : meas.values) {
    if (!std::isfinite(v)) {
      throw IoError("write_measurements_csv: non-finite value");
    }
  }
  std::ofstream f = open_out(path);
  const Rect& u = meas.scan.region;
  f << fmt_double(meas.eta[0]) << ',' << fmt_double(meas.eta[1]) << ','
    << fmt_double(u.x0) << ',' << fmt_double(u.y0) << ',' << fmt_double(u.x1)
    << ',' << fmt_double(u.y1) << ',' << meas.scan.n1 << ',' << meas.scan.n2
    << ',' << (meas.shape.perfect ? "perfect" : "gaussian") << ','
    << fmt_double(meas.shape.sigma1) << ',' << fmt_double(meas.shape.sigma2)
    << ',' << measurement_path_name(meas.path) << '\n';
  for (int k = 0; k < meas.scan.size(); ++k) {
    auto [x, y] = meas.scan.focus(k);
    f << k << ',' << fmt_double(x) << ',' << fmt_double(y) << ','
      << fmt_double(meas.values[k]) << '\n';
  }
  if (!f) {
    throw IoError("write_measurements_csv: write failed for '" + path + "'");
  }
}

MeasurementSet read_measurements_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) {
    throw IoError("read_measurements_csv: missing header in '" + path + "'");
  }
  auto head = split_csv(line);
  if (head.size() != 12) {
    throw IoError("read_measurements_csv: malformed header (expected 12 "
                  "fields, got " +
                  std::to_string(head.size()) + ")");
  }
  MeasurementSet meas;
  meas.eta = {parse_double(head[0], "header eta_x"),
              parse_double(head[1], "header eta_y")};
  Rect u{parse_double(head[2], "header u_x0"),
         parse_double(head[3], "header u_y0"),
         parse_double(head[4], "header u_x1"),
         parse_double(head[5], "header u_y1")};
  int n1 = static_cast<int>(parse_long(head[6], "header n1"));
  int n2 = static_cast<int>(parse_long(head[7], "header n2"));
  if (n1 < 2 || n2 < 2 || !(u.width() > 0.0) || !(u.height() > 0.0)) {
    throw IoError("read_measurements_csv: invalid scan region in header");
  }
  meas.scan = ScanGrid{u, n1, n2};
  if (head[8] == "perfect") {
    meas.shape = UltrasoundShape::perfect_focus();
  } else if (head[8] == "gaussian") {
    meas.shape = UltrasoundShape::gaussian(
        parse_double(head[9], "header sigma1"),
        parse_double(head[10], "header sigma2"));
  } else {
    throw IoError("read_measurements_csv: unknown shape '" + head[8] + "'");
  }
  meas.path = parse_measurement_path(head[11]);
  meas.values.assign(static_cast<std::size_t>(n1) * n2, 0.0);
  std::vector<char> seen(meas.values.size(), 0);
  long rows = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 4) {
      throw IoError("read_measurements_csv: malformed row '" + line + "'");
    }
    long k = parse_long(cells[0], "measurement row index");
    double v = parse_double(cells[3], "measurement value");
    if (k < 0 || k >= static_cast<long>(meas.values.size())) {
      throw IoError("read_measurements_csv: row index out of range");
    }
    if (!std::isfinite(v)) {
      throw IoError("read_measurements_csv: non-finite value");
    }
    meas.values[k] = v;
    seen[k] = 1;
    ++rows;
  }
  if (rows != static_cast<long>(meas.values.size())) {
    throw IoError("read_measurements_csv: expected " +
                  std::to_string(meas.values.size()) + " rows, got " +
                  std::to_string(rows));
  }
  for (char s : seen) {
    if (!s) {
      throw IoError("read_measurements_csv: duplicate or missing rows");
    }
  }
  return meas;
}

void write_pgm(const NodalField& field, const std::string& path,
               PgmRange range, double lo, double hi) {
  const RegularGrid& g = field.grid;
  if (range == PgmRange::auto_range) {
    lo = min_value(field);
    hi = max_value(field);
  }
  if (!(hi > lo)) {
    std::cerr << "write_pgm: degenerate range, writing uniform mid-gray\n";
  }
  std::ofstream f = open_out(path);
  f << "P5\n" << g.nx << ' ' << g.ny << "\n65535\n";
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
  std::vector<unsigned char> row(static_cast<std::size_t>(g.nx) * 2);
  for (int j = g.ny - 1; j >= 0; --j) {  // row 0 at maximal y
    for (int i = 0; i < g.nx; ++i) {
      double v = field.at(i, j);
      std::uint16_t pix = 32767;
      if (hi > lo) {
        double t = (v - lo) * scale;
        t = std::clamp(t, 0.0, 65535.0);
        pix = static_cast<std::uint16_t>(std::lround(t));
      }
      row[2 * i] = static_cast<unsigned char>(pix >> 8);  // big-endian
      row[2 * i + 1] = static_cast<unsigned char>(pix & 0xff);
    }
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw IoError("write_pgm: write failed for '" + path + "'");
}

}  // namespace uot
