#include "bdgraphtv/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, char prefix) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index k = 0; k < m.rows(); ++k) out << (k ? "," : "") << prefix << k;
  out << "\n";
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    for (Eigen::Index k = 0; k < m.rows(); ++k) out << (k ? "," : "") << format_double(m(k, i));
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, char prefix) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty()) throw IoError(path.string() + ": empty header");
  for (std::size_t k = 0; k < header.size(); ++k) {
    std::string h = header[k];
    if (!h.empty() && h.back() == '\r') h.pop_back();
    if (h != std::string(1, prefix) + std::to_string(k))
      throw IoError(path.string() + ": expected column " + prefix + std::to_string(k));
  }
  const std::size_t d = header.size();
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw IoError(path.string() + ": bad number '" + cell + "' on row " + std::to_string(rows + 1));
      data.push_back(v);
      ++k;
    }
    if (k != d) throw IoError(path.string() + ": row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  return Eigen::Map<Eigen::MatrixXd>(data.data(), static_cast<Eigen::Index>(d),
                                     static_cast<Eigen::Index>(rows));
}

}  // namespace

void write_points_csv(const std::filesystem::path& path, const EmpiricalMeasure& cloud) {
  write_matrix(path, cloud.points(), 'x');
  std::ofstream meta(path.string() + ".meta.json");
  if (!meta) throw IoError("cannot write metadata for " + path.string());
  nlohmann::json j{{"seed", cloud.seed()}, {"n", cloud.size()}, {"d", cloud.dim()}};
  meta << j.dump(2) << "\n";
}

EmpiricalMeasure read_points_csv(const std::filesystem::path& path) {
  Eigen::MatrixXd pts = read_matrix(path, 'x');
  if (pts.cols() < 1) throw IoError(path.string() + ": no points");
  std::uint64_t seed = 0;
  const std::filesystem::path meta = path.string() + ".meta.json";
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    try {
      seed = nlohmann::json::parse(in).value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw IoError(meta.string() + ": " + e.what());
    }
  }
  return EmpiricalMeasure(std::move(pts), seed);
}

void write_field_csv(const std::filesystem::path& path, const NodeField& field) {
  write_matrix(path, field.values(), 'u');
}

NodeField read_field_csv(const std::filesystem::path& path) {
  return NodeField(read_matrix(path, 'u'));
}

}  // namespace bdgraphtv
