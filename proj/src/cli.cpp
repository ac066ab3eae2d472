#include "qbayes/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "qbayes/io.hpp"

namespace qbayes::cli {

namespace {

struct Flags {
  std::optional<double> eq;
  std::optional<double> rank;
  std::optional<double> psd;
  std::string format = "json";
  std::string out;
};

void add_tolerance_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tol-eq", f.eq, "entrywise equality tolerance");
  cmd->add_option("--tol-rank", f.rank, "relative rank threshold");
  cmd->add_option("--tol-psd", f.psd, "absolute PSD slack");
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "text"}));
}

Tolerances tolerances(const io::ProblemFile& p, const Flags& f) {
  return io::resolve_tolerances(p.tolerances, io::ToleranceOverrides{f.eq, f.rank, f.psd});
}

std::string render(const io::Json& report, const Flags& f) {
  return f.format == "text" ? io::render_text(report) : io::dump(report);
}

void emit(const std::string& text, const Flags& f, std::ostream& out) {
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(f.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::ParseError, "cannot write " + f.out);
  file << text;
}

io::Json parse_json_file(const std::string& path) {
  const std::string text = io::read_file(path);
  try {
    return io::Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorKind::ParseError, path + ": malformed JSON");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian inverses of completely positive unital maps", "qbayes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);

  Flags inv;
  std::string invert_file;
  auto* invert = app.add_subcommand("invert", "decide existence of and construct a Bayesian inverse");
  invert->add_option("file", invert_file, "problem file")->required();
  invert->add_option("--out", inv.out, "write the report here instead of standard output");
  add_tolerance_flags(invert, inv);

  Flags chk;
  std::string check_problem;
  std::string check_candidate;
  auto* check = app.add_subcommand("check", "verify a candidate inverse against a problem");
  check->add_option("problem", check_problem, "problem file")->required();
  check->add_option("candidate", check_candidate, "report or bare inverse payload")->required();
  check->add_option("--out", chk.out, "write the report here instead of standard output");
  add_tolerance_flags(check, chk);

  std::string example_name;
  std::string example_dir = ".";
  bool example_all = false;
  auto* examples = app.add_subcommand("examples", "list or write bundled problem files");
  examples->add_option("name", example_name, "example to write");
  examples->add_option("--dir", example_dir, "output directory");
  examples->add_flag("--all", example_all, "write every example");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << io::kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (invert->parsed()) {
      const auto problem = io::load_problem(invert_file);
      const auto result = io::run_invert(problem, tolerances(problem, inv));
      emit(render(result.report, inv), inv, out);
      return result.exit_code;
    }
    if (check->parsed()) {
      const auto problem = io::load_problem(check_problem);
      const auto candidate = parse_json_file(check_candidate);
      const auto result = io::run_check(problem, candidate, tolerances(problem, chk));
      emit(render(result.report, chk), chk, out);
      return result.pass ? 0 : 4;
    }
    if (examples->parsed()) {
      std::vector<std::string> names;
      if (example_all) names = io::example_names();
      else if (!example_name.empty()) names = {example_name};
      if (names.empty()) {
        for (const auto& n : io::example_names()) out << n << '\n';
        return 0;
      }
      std::filesystem::create_directories(example_dir);
      for (const auto& n : names) {
        const auto problem = io::example_problem(n);
        const auto path = std::filesystem::path(example_dir) / (n + ".json");
        std::ofstream file(path, std::ios::binary);
        if (!file) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
        file << io::dump(problem);
        out << path.string() << '\n';
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InternalInconsistency ? 5 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 5;
  }
  return 1;
}

}  // namespace qbayes::cli
