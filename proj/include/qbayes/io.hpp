#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbayes/bayes_cstar.hpp"
#include "qbayes/bayes_matrix.hpp"

namespace qbayes::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum class ProblemKind { Matrix, CStar, Classical, Povm, Ensemble, Collapse, Isometry };

const char* to_string(ProblemKind kind);

struct ToleranceOverrides {
  std::optional<double> eq;
  std::optional<double> rank;
  std::optional<double> psd;
};

// defaults < file < flags
Tolerances resolve_tolerances(const ToleranceOverrides& file, const ToleranceOverrides& flags);

struct ProblemFile {
  ProblemKind kind = ProblemKind::Matrix;
  ToleranceOverrides tolerances;
  std::string digest;  // "sha256:<hex>" of the raw input bytes

  std::optional<Channel> channel;             // matrix
  std::optional<BlockChannel> block_channel;  // cstar
  std::optional<CStarState> state;            // cstar
  CMatrix rho;                                // matrix, povm, collapse, isometry
  RMatrix f;                                  // classical, column-stochastic
  Eigen::VectorXd p;                          // classical, ensemble
  std::vector<CMatrix> operators;             // POVM elements, ensemble states, projections
  CMatrix v;                                  // isometry
};

// Matrix encodings: row-major nested arrays; entries are [re, im] pairs or
// plain reals.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path);
Json real_matrix_to_json(const RMatrix& m);
RMatrix real_matrix_from_json(const Json& j, const std::string& path);

Json channel_to_json(const Channel& c);
Channel channel_from_json(const Json& j, const std::string& path);
Json block_channel_to_json(const BlockChannel& c);
BlockChannel block_channel_from_json(const Json& j, const std::string& path);
Json state_to_json(const CStarState& s);
CStarState state_from_json(const Json& j, const std::string& path);

ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);
std::string read_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

struct InvertResult {
  Json report;
  int exit_code = 0;  // 0 Exists, 2 FailsSelfAdjoint, 3 FailsCompletion
};

InvertResult run_invert(const ProblemFile& problem, const Tolerances& tol);

struct CheckResultReport {
  Json report;
  bool pass = false;
};

// `candidate` is either a full report (its "inverse" is used) or a bare
// inverse payload of the shape run_invert emits for the problem kind.
CheckResultReport run_check(const ProblemFile& problem, const Json& candidate,
                            const Tolerances& tol);

// Deterministic rendering: floats as %.17g, two-space indentation.
std::string dump(const Json& j);
std::string render_text(const Json& report);

std::vector<std::string> example_names();
Json example_problem(const std::string& name);  // throws UnknownExample

}  // namespace qbayes::io
