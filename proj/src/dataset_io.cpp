#include "lpopt/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "lpopt/text.hpp"

namespace lpopt {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IoError("idx: truncated header in " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_csv_dataset(const std::string& path, bool classification) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty file " + path);
  strip_cr(line);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "target") {
    throw IoError("csv: header must end with a 'target' column: " + path);
  }
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<double> values;
  std::vector<double> targets;
  long n = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError("csv: row " + std::to_string(n + 1) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(header.size()));
    }
    for (int j = 0; j < d; ++j) values.push_back(parse_double(fields[j]));
    targets.push_back(parse_double(fields.back()));
    ++n;
  }
  if (n == 0) throw IoError("csv: no data rows in " + path);

  Dataset ds;
  ds.X.resize(n, d);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      ds.X(i, j) = values[static_cast<std::size_t>(i) * d + j];
    }
  }
  if (!classification) {
    ds.targets = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
    return ds;
  }
  ds.labels.resize(static_cast<std::size_t>(n));
  int max_label = 0;
  for (long i = 0; i < n; ++i) {
    const double t = targets[static_cast<std::size_t>(i)];
    if (!(t >= 0.0 && t == std::floor(t) && t <= 1e9)) {
      throw IoError("csv: target in row " + std::to_string(i + 1) +
                    " is not a nonnegative integer label");
    }
    ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(t);
    max_label = std::max(max_label, static_cast<int>(t));
  }
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("csv: cannot write " + path);
  for (int j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
  out << "target\n";
  for (long i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) out << format_double(ds.X(i, j)) << ',';
    if (ds.is_classification()) {
      out << ds.labels[static_cast<std::size_t>(i)];
    } else {
      out << format_double(ds.targets[i]);
    }
    out << '\n';
  }
  if (!out.flush()) throw IoError("csv: write failed for " + path);
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("idx: cannot open " + images_path);
  if (read_be32(img, images_path) != 0x00000803u) {
    throw IoError("idx: bad image magic in " + images_path);
  }
  const std::uint32_t n = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);
  const std::size_t d = std::size_t(rows) * cols;
  if (n == 0 || d == 0) throw IoError("idx: empty image file " + images_path);
  std::vector<unsigned char> pixels(std::size_t(n) * d);
  if (!img.read(reinterpret_cast<char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size()))) {
    throw IoError("idx: truncated image data in " + images_path);
  }

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("idx: cannot open " + labels_path);
  if (read_be32(lab, labels_path) != 0x00000801u) {
    throw IoError("idx: bad label magic in " + labels_path);
  }
  const std::uint32_t nl = read_be32(lab, labels_path);
  if (nl != n) {
    throw IoError("idx: image/label counts differ (" + std::to_string(n) +
                  " vs " + std::to_string(nl) + ")");
  }
  std::vector<unsigned char> raw_labels(n);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), n)) {
    throw IoError("idx: truncated label data in " + labels_path);
  }

  Dataset ds;
  ds.X.resize(static_cast<long>(n), static_cast<int>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ds.X(static_cast<long>(i), static_cast<long>(j)) =
          pixels[i * d + j] / 255.0;
    }
  }
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  int max_label = 0;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.num_classes = max_label + 1;
  return ds;
}

}  // namespace lpopt
