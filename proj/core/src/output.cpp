#include "hetdyn/output.hpp"

#include "hetdyn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace hetdyn {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "'");
  }
  std::ofstream out(path, mode | std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode | std::ios::in);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void put_number(std::string& line, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(n));
}

std::vector<double> split_numbers(const std::string& line, const fs::path& path,
                                  std::size_t row) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::string_view cell(line.data() + pos, end - pos);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
      throw IoError("malformed number in '" + path.string() + "' row " + std::to_string(row));
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace

SpaceTime space_time(const SimulationRun& run, std::size_t component) {
  if (component >= run.components) throw InvalidParameter("component out of range");
  if (!run.grid) throw InvalidParameter("space-time output needs a spatial run");
  SpaceTime st;
  const std::size_t n = run.grid->size();
  st.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) st.x[j] = run.grid->node(j);
  st.t = run.times;
  st.values.resize(static_cast<Eigen::Index>(run.snapshots.size()),
                   static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    st.values.row(static_cast<Eigen::Index>(i)) =
        hetdyn::component(run.snapshots[i], component, n).transpose();
  }
  return st;
}

void write_field_csv(const fs::path& path, const SpaceTime& field) {
  if (static_cast<std::size_t>(field.values.rows()) != field.t.size() ||
      static_cast<std::size_t>(field.values.cols()) != field.x.size()) {
    throw DimensionMismatch("space-time values do not match x and t");
  }
  auto out = open_out(path);
  std::string line = "x";
  for (double x : field.x) {
    line += ',';
    put_number(line, x);
  }
  out << line << '\n';
  for (Eigen::Index i = 0; i < field.values.rows(); ++i) {
    line.clear();
    put_number(line, field.t[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
      line += ',';
      put_number(line, field.values(i, j));
    }
    out << line << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SpaceTime read_field_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,", 0) != 0) {
    throw IoError("'" + path.string() + "' does not start with an x row");
  }
  SpaceTime st;
  st.x = split_numbers(line.substr(2), path, 0);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto v = split_numbers(line, path, rows.size() + 1);
    if (v.size() != st.x.size() + 1) {
      throw IoError("row " + std::to_string(rows.size() + 1) + " of '" + path.string() +
                    "' has the wrong length");
    }
    rows.push_back(std::move(v));
  }
  st.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(st.x.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    st.t.push_back(rows[i][0]);
    for (std::size_t j = 0; j < st.x.size(); ++j) {
      st.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
  }
  return st;
}

void write_spacetime_binary(const fs::path& path, const Eigen::MatrixXd& values) {
  auto out = open_out(path, std::ios::binary);
  std::vector<char> bytes(static_cast<std::size_t>(values.size()) * 8);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      std::uint64_t bits;
      const double v = values(i, j);
      std::memcpy(&bits, &v, 8);
      for (int b = 0; b < 8; ++b) bytes[k++] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  std::ostringstream meta;
  meta << "rows " << values.rows() << "\ncols " << values.cols()
       << "\ndtype f64le\norder row-major (time x space)\n";
  write_text(fs::path(path.string() + ".meta"), meta.str());
}

Eigen::MatrixXd read_spacetime_binary(const fs::path& path) {
  std::istringstream meta(read_text(fs::path(path.string() + ".meta")));
  std::string word;
  Eigen::Index rows = -1, cols = -1;
  while (meta >> word) {
    if (word == "rows") meta >> rows;
    if (word == "cols") meta >> cols;
  }
  if (rows < 0 || cols < 0) throw IoError("sidecar of '" + path.string() + "' lacks dimensions");
  auto in = open_in(path, std::ios::binary);
  std::vector<char> bytes(static_cast<std::size_t>(rows * cols) * 8);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()) || in.peek() != EOF) {
    throw IoError("'" + path.string() + "' size does not match its sidecar");
  }
  Eigen::MatrixXd values(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[k++])) << (8 * b);
      }
      std::memcpy(&values(i, j), &bits, 8);
    }
  }
  return values;
}

Rgb blue_white_red(double v, double lo, double hi) noexcept {
  if (std::isnan(v)) return {128, 128, 128};
  if (!(hi > lo)) return {255, 255, 255};
  const double s = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  auto level = [](double f) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(f, 0.0, 1.0)));
  };
  if (s < 0.5) {
    const std::uint8_t c = level(2.0 * s);
    return {c, c, 255};
  }
  const std::uint8_t c = level(2.0 * (1.0 - s));
  return {255, c, c};
}

void render_heatmap(const fs::path& path, const Eigen::MatrixXd& values,
                    std::optional<std::pair<double, double>> range) {
  if (values.size() == 0) throw InvalidParameter("cannot render an empty matrix");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (range) {
    std::tie(lo, hi) = *range;
  } else {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double v = values.data()[i];
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!std::isfinite(lo)) lo = hi = 0.0;
  }
  auto out = open_out(path, std::ios::binary);
  out << "P6\n" << values.cols() << ' ' << values.rows() << "\n255\n";
  std::vector<char> pixels;
  pixels.reserve(static_cast<std::size_t>(values.size()) * 3);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      for (auto c : blue_white_red(values(i, j), lo, hi)) pixels.push_back(static_cast<char>(c));
    }
  }
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hetdyn
