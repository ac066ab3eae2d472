#include "qbayes/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include <openssl/evp.h>

namespace qbayes::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::ParseError, (path.empty() ? std::string("/") : path) + ": " + msg);
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

double number_from_json(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

std::size_t count_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  const auto v = j.get<long long>();
  if (v < 0) fail(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {number_from_json(j, path), 0.0};
  if (j.is_array() && j.size() == 2) {
    return {number_from_json(j[0], path + "/0"), number_from_json(j[1], path + "/1")};
  }
  fail(path, "expected a number or an [re, im] pair");
}

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

std::vector<CMatrix> matrix_list_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of matrices");
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(matrix_from_json(j[k], path + "/" + std::to_string(k)));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = number_from_json(j[k], path + "/" + std::to_string(k));
  return v;
}

std::vector<std::size_t> blocks_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of block sizes");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto d = count_from_json(j[k], path + "/" + std::to_string(k));
    if (d == 0) fail(path + "/" + std::to_string(k), "block size must be positive");
    out.push_back(d);
  }
  return out;
}

void require_shape(const CMatrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(path, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix, got " +
                   std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

std::vector<CMatrix> kraus_from_json(const Json& j, std::size_t dim_in, std::size_t dim_out,
                                     const std::string& path) {
  auto kraus = matrix_list_from_json(j, path);
  for (std::size_t k = 0; k < kraus.size(); ++k)
    require_shape(kraus[k], static_cast<Eigen::Index>(dim_out), static_cast<Eigen::Index>(dim_in),
                  path + "/" + std::to_string(k));
  return kraus;
}

ToleranceOverrides tolerances_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  ToleranceOverrides t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string sub = path + "/" + it.key();
    if (it.key() == "eq") t.eq = number_from_json(*it, sub);
    else if (it.key() == "rank") t.rank = number_from_json(*it, sub);
    else if (it.key() == "psd") t.psd = number_from_json(*it, sub);
    else fail(sub, "unknown tolerance");
  }
  return t;
}

ProblemKind kind_from_string(const std::string& s, const std::string& path) {
  if (s == "matrix") return ProblemKind::Matrix;
  if (s == "cstar") return ProblemKind::CStar;
  if (s == "classical") return ProblemKind::Classical;
  if (s == "povm") return ProblemKind::Povm;
  if (s == "ensemble") return ProblemKind::Ensemble;
  if (s == "collapse") return ProblemKind::Collapse;
  if (s == "isometry") return ProblemKind::Isometry;
  fail(path, "unknown problem kind \"" + s + "\"");
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

bool is_flat(const Json& j) {
  if (!j.is_array()) return false;
  return std::all_of(j.begin(), j.end(), [](const Json& e) {
    return is_scalar(e) || (e.is_array() && std::all_of(e.begin(), e.end(), is_scalar));
  });
}

void write(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      if (is_flat(j)) {
        os << '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) os << ", ";
          write(os, j[k], indent);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        os << inner;
        write(os, j[k], indent + 1);
        os << (k + 1 < j.size() ? ",\n" : "\n");
      }
      os << pad << ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      std::size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        os << inner << Json(it.key()).dump() << ": ";
        write(os, *it, indent + 1);
        os << (k + 1 < j.size() ? ",\n" : "\n");
      }
      os << pad << '}';
      return;
    }
    default:
      os << j.dump();
      return;
  }
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Matrix: return "matrix";
    case ProblemKind::CStar: return "cstar";
    case ProblemKind::Classical: return "classical";
    case ProblemKind::Povm: return "povm";
    case ProblemKind::Ensemble: return "ensemble";
    case ProblemKind::Collapse: return "collapse";
    case ProblemKind::Isometry: return "isometry";
  }
  return "unknown";
}

Tolerances resolve_tolerances(const ToleranceOverrides& file, const ToleranceOverrides& flags) {
  Tolerances t;
  auto pick = [](double& dst, const std::optional<double>& a, const std::optional<double>& b) {
    if (b) dst = *b;
    else if (a) dst = *a;
  };
  pick(t.eq_tol, file.eq, flags.eq);
  pick(t.rank_tol, file.rank, flags.rank);
  pick(t.psd_tol, file.psd, flags.psd);
  t.validate();
  return t;
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].empty()) fail(rp, "expected a non-empty row");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) fail(rp, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
  }
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          complex_from_json(j[i][k], path + "/" + std::to_string(i) + "/" + std::to_string(k));
  return m;
}

Json real_matrix_to_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix real_matrix_from_json(const Json& j, const std::string& path) {
  const CMatrix c = matrix_from_json(j, path);
  if (c.imag().cwiseAbs().maxCoeff() != 0.0) fail(path, "expected real entries");
  return c.real();
}

Json channel_to_json(const Channel& c) {
  Json j;
  j["dim_in"] = c.dim_in();
  j["dim_out"] = c.dim_out();
  Json kraus = Json::array();
  for (const auto& k : c.kraus()) kraus.push_back(matrix_to_json(k));
  j["kraus"] = std::move(kraus);
  return j;
}

Channel channel_from_json(const Json& j, const std::string& path) {
  const auto dim_in = count_from_json(field(j, "dim_in", path), path + "/dim_in");
  const auto dim_out = count_from_json(field(j, "dim_out", path), path + "/dim_out");
  if (dim_in == 0 || dim_out == 0) fail(path, "dimensions must be positive");
  return Channel(dim_in, dim_out, kraus_from_json(field(j, "kraus", path), dim_in, dim_out, path + "/kraus"));
}

Json block_channel_to_json(const BlockChannel& c) {
  Json j;
  j["source_blocks"] = c.source().blocks;
  j["target_blocks"] = c.target().blocks;
  Json entries = Json::array();
  for (std::size_t t = 0; t < c.target().size(); ++t) {
    for (std::size_t s = 0; s < c.source().size(); ++s) {
      const auto& e = c.entry(t, s);
      if (e.kraus().empty()) continue;
      Json ej;
      ej["target"] = t;
      ej["source"] = s;
      Json kraus = Json::array();
      for (const auto& k : e.kraus()) kraus.push_back(matrix_to_json(k));
      ej["kraus"] = std::move(kraus);
      entries.push_back(std::move(ej));
    }
  }
  j["entries"] = std::move(entries);
  return j;
}

BlockChannel block_channel_from_json(const Json& j, const std::string& path) {
  CStarAlgebra source{blocks_from_json(field(j, "source_blocks", path), path + "/source_blocks")};
  CStarAlgebra target{blocks_from_json(field(j, "target_blocks", path), path + "/target_blocks")};
  BlockChannel out = BlockChannel::zeros(source, target);
  const Json& entries = field(j, "entries", path);
  if (!entries.is_array()) fail(path + "/entries", "expected an array");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const std::string ep = path + "/entries/" + std::to_string(k);
    const auto t = count_from_json(field(entries[k], "target", ep), ep + "/target");
    const auto s = count_from_json(field(entries[k], "source", ep), ep + "/source");
    if (t >= target.size()) fail(ep + "/target", "block index out of range");
    if (s >= source.size()) fail(ep + "/source", "block index out of range");
    if (!seen.insert({t, s}).second) fail(ep, "duplicate entry");
    out.set_entry(t, s, Channel(source.blocks[s], target.blocks[t],
                                kraus_from_json(field(entries[k], "kraus", ep), source.blocks[s],
                                                target.blocks[t], ep + "/kraus")));
  }
  return out;
}

Json state_to_json(const CStarState& s) {
  Json j;
  j["weights"] = s.weights;
  Json d = Json::array();
  for (const auto& m : s.densities) d.push_back(matrix_to_json(m));
  j["densities"] = std::move(d);
  return j;
}

CStarState state_from_json(const Json& j, const std::string& path) {
  CStarState s;
  const Eigen::VectorXd w = vector_from_json(field(j, "weights", path), path + "/weights");
  s.weights.assign(w.data(), w.data() + w.size());
  s.densities = matrix_list_from_json(field(j, "densities", path), path + "/densities");
  if (s.densities.size() != s.weights.size()) fail(path, "weights and densities differ in length");
  return s;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::InternalInconsistency, "SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProblemFile parse_problem(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min(e.byte ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto nl = text.rfind('\n', upto ? upto - 1 : 0);
    const auto col = nl == std::string::npos || upto == 0 ? upto + 1 : upto - nl;
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": malformed JSON");
  }
  ProblemFile p;
  p.digest = "sha256:" + sha256_hex(text);
  const Json& kind = field(j, "kind", "");
  if (!kind.is_string()) fail("/kind", "expected a string");
  p.kind = kind_from_string(kind.get<std::string>(), "/kind");
  if (j.contains("tolerances")) p.tolerances = tolerances_from_json(j["tolerances"], "/tolerances");

  switch (p.kind) {
    case ProblemKind::Matrix:
      p.channel = channel_from_json(field(j, "channel", ""), "/channel");
      p.rho = matrix_from_json(field(j, "rho", ""), "/rho");
      break;
    case ProblemKind::CStar:
      p.block_channel = block_channel_from_json(field(j, "channel", ""), "/channel");
      p.state = state_from_json(field(j, "state", ""), "/state");
      break;
    case ProblemKind::Classical:
      p.f = real_matrix_from_json(field(j, "f", ""), "/f");
      p.p = vector_from_json(field(j, "p", ""), "/p");
      break;
    case ProblemKind::Povm:
      p.operators = matrix_list_from_json(field(j, "elements", ""), "/elements");
      p.rho = matrix_from_json(field(j, "rho", ""), "/rho");
      break;
    case ProblemKind::Ensemble:
      p.operators = matrix_list_from_json(field(j, "states", ""), "/states");
      p.p = vector_from_json(field(j, "p", ""), "/p");
      break;
    case ProblemKind::Collapse:
      p.operators = matrix_list_from_json(field(j, "projections", ""), "/projections");
      p.rho = matrix_from_json(field(j, "rho", ""), "/rho");
      break;
    case ProblemKind::Isometry:
      p.v = matrix_from_json(field(j, "v", ""), "/v");
      p.rho = matrix_from_json(field(j, "rho", ""), "/rho");
      break;
  }
  return p;
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_file(path)); }

std::string dump(const Json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << '\n';
  return os.str();
}

}  // namespace qbayes::io
