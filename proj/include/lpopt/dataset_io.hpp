#pragma once

#include <string>

#include "lpopt/objectives.hpp"

namespace lpopt {

// Comma-separated file with header "f0,...,f{d-1},target".  With
// classification=true the target column must hold nonnegative integer
// labels; class count is the largest label plus one.
Dataset load_csv_dataset(const std::string& path, bool classification);

void save_csv_dataset(const std::string& path, const Dataset& ds);

// Big-endian IDX pair: images with magic 0x00000803 (count, rows, cols,
// then bytes), labels with magic 0x00000801.  Pixels are scaled to [0, 1];
// counts must agree between the two files.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace lpopt
