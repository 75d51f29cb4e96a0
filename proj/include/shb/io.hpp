// Instance files: a key = value header plus CSV matrices, all in round-trip decimal.
//
//   <dir>/instance.txt   family, n, m, kappa, p_fail, noise_scale, seed, x_star_mode, x_star, feasible
//   <dir>/A.csv, b.csv   phase retrieval (m rows)
//   <dir>/H.csv, c.csv   smooth quadratic (H_i stacked, m * n rows; c_i one per row)
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shb/common.hpp"
#include "shb/oracle.hpp"

namespace shb::io {

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& kv);

Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

void save_instance(const StochasticProblem& problem, const std::filesystem::path& dir);
std::shared_ptr<StochasticProblem> load_instance(const std::filesystem::path& dir);

}  // namespace shb::io
