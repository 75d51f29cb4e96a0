#include "shb/io.hpp"

#include <fstream>
#include <sstream>

#include "shb/text.hpp"

namespace shb::io {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KeyValues read_key_values(const fs::path& path) {
  KeyValues kv;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("'" + path.string() + "': expected key = value, got '" + line + "'");
    kv[std::string(text::trim(t.substr(0, eq)))] = std::string(text::trim(t.substr(eq + 1)));
  }
  return kv;
}

void write_key_values(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  write_file(path, out);
}

Matrix read_csv_matrix(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    rows.push_back(text::parse_vector(line));
    if (rows.back().size() != rows.front().size()) {
      throw ConfigError("'" + path.string() + "': ragged row " + std::to_string(rows.size()));
    }
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

void write_csv_matrix(const fs::path& path, const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += text::format(Vector(m.row(i).transpose()));
    out.push_back('\n');
  }
  write_file(path, out);
}

namespace {

std::string mode_name(XStarMode m) { return m == XStarMode::UnitSphere ? "unit-sphere" : "standard-normal"; }

XStarMode parse_mode(const std::string& s) {
  if (s == "unit-sphere") return XStarMode::UnitSphere;
  if (s == "standard-normal") return XStarMode::StandardNormal;
  throw ConfigError("unknown x_star_mode '" + s + "'");
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("instance header lacks '" + key + "'");
  return it->second;
}

}  // namespace

void save_instance(const StochasticProblem& problem, const fs::path& dir) {
  fs::create_directories(dir);
  if (const auto* pr = dynamic_cast<const PhaseRetrieval*>(&problem)) {
    const auto& p = pr->params();
    write_key_values(dir / "instance.txt", {{"family", "phase_retrieval"},
                                            {"n", std::to_string(pr->dim())},
                                            {"m", std::to_string(pr->sample_count())},
                                            {"kappa", text::format(p.kappa)},
                                            {"p_fail", text::format(p.p_fail)},
                                            {"noise_scale", text::format(p.noise_scale)},
                                            {"seed", std::to_string(pr->seed())},
                                            {"x_star_mode", mode_name(p.x_star_mode)},
                                            {"x_star", text::format(pr->x_star())},
                                            {"feasible", pr->feasible_set().to_string()}});
    write_csv_matrix(dir / "A.csv", pr->a());
    write_csv_matrix(dir / "b.csv", pr->b());
    return;
  }
  if (const auto* sq = dynamic_cast<const SmoothQuadratic*>(&problem)) {
    const auto n = static_cast<Eigen::Index>(sq->dim());
    const auto m = static_cast<Eigen::Index>(sq->sample_count());
    write_key_values(dir / "instance.txt", {{"family", "smooth_quadratic"},
                                            {"n", std::to_string(n)},
                                            {"m", std::to_string(m)},
                                            {"feasible", sq->feasible_set().to_string()}});
    Matrix h(m * n, n);
    Matrix c(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      h.block(i * n, 0, n, n) = sq->hessians()[static_cast<std::size_t>(i)];
      c.row(i) = sq->linear_terms()[static_cast<std::size_t>(i)].transpose();
    }
    write_csv_matrix(dir / "H.csv", h);
    write_csv_matrix(dir / "c.csv", c);
    return;
  }
  throw ConfigError("save_instance: unsupported problem type");
}

std::shared_ptr<StochasticProblem> load_instance(const fs::path& dir) {
  const KeyValues kv = read_key_values(dir / "instance.txt");
  const std::string& family = require(kv, "family");
  const auto n = static_cast<std::size_t>(text::parse_int(require(kv, "n")));
  const auto m = static_cast<std::size_t>(text::parse_int(require(kv, "m")));
  const ConvexSet feasible = ConvexSet::parse(kv.count("feasible") ? kv.at("feasible") : "whole", n);
  if (family == "phase_retrieval") {
    PhaseRetrievalParams p;
    p.n = n;
    p.m = m;
    p.kappa = text::parse_double(require(kv, "kappa"));
    p.p_fail = text::parse_double(require(kv, "p_fail"));
    p.noise_scale = text::parse_double(require(kv, "noise_scale"));
    p.x_star_mode = parse_mode(require(kv, "x_star_mode"));
    const Matrix a = read_csv_matrix(dir / "A.csv");
    const Matrix b = read_csv_matrix(dir / "b.csv");
    if (static_cast<std::size_t>(a.rows()) != m || static_cast<std::size_t>(a.cols()) != n) {
      throw DimensionError("A.csv does not match the header's m x n");
    }
    if (b.cols() != 1 || static_cast<std::size_t>(b.rows()) != m) throw DimensionError("b.csv must hold m values");
    Vector x_star = text::parse_vector(require(kv, "x_star"));
    return std::make_shared<PhaseRetrieval>(RowMatrix(a), Vector(b.col(0)), std::move(x_star), p,
                                            static_cast<std::uint64_t>(text::parse_int(require(kv, "seed"))),
                                            feasible);
  }
  if (family == "smooth_quadratic") {
    const Matrix h = read_csv_matrix(dir / "H.csv");
    const Matrix c = read_csv_matrix(dir / "c.csv");
    const auto ni = static_cast<Eigen::Index>(n);
    if (h.rows() != static_cast<Eigen::Index>(m * n) || h.cols() != ni || c.rows() != static_cast<Eigen::Index>(m) ||
        c.cols() != ni) {
      throw DimensionError("H.csv / c.csv do not match the header's m and n");
    }
    std::vector<Matrix> hs;
    std::vector<Vector> cs;
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      hs.push_back(h.block(row * ni, 0, ni, ni));
      cs.push_back(c.row(row).transpose());
    }
    return std::make_shared<SmoothQuadratic>(std::move(hs), std::move(cs), feasible);
  }
  throw ConfigError("unknown instance family '" + family + "'");
}

}  // namespace shb::io
