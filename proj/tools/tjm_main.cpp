// tjm: twisted Jacobi structures on coordinate charts.
//
// Subcommands: verify, bracket, jacobiator, classify, rank, leaf,
// make-contact, make-lcs. Exit codes: 0 = all checked identities pass,
// 1 = identities or preconditions fail, 2 = malformed input. The
// machine-readable report goes to stdout and is byte-identical for a fixed
// seed; timings go to stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tjm/foliation.hpp"
#include "tjm/structure_file.hpp"
#include "tjm/structures.hpp"

namespace {

using namespace tjm;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TJM_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

struct LoadedStructure {
  TwistedJacobiStructure structure;
  std::string digest;
};

LoadedStructure load(const std::string& path) {
  const std::string bytes = slurp(path);
  std::istringstream is(bytes);
  StructureFile f = read_structure_file(is);
  return LoadedStructure{instantiate(f), hex64(fnv1a64(bytes))};
}

void print_header(const std::string& command, const std::string& path,
                  const std::string& digest, std::optional<std::uint64_t> seed) {
  std::cout << "command: " << command << "\n";
  if (!path.empty()) std::cout << "file: " << path << "\n";
  if (!digest.empty()) std::cout << "digest: " << digest << "\n";
  if (seed) std::cout << "seed: " << *seed << "\n";
}

void print_report(const VerificationReport& report) { std::cout << report.str(); }

int finish(bool pass) {
  std::cout << "result: " << (pass ? "pass" : "fail") << "\n";
  return pass ? 0 : 1;
}

Point parse_point(const std::string& text, int dim) {
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      coords.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FileFormatError("malformed point component '" + item + "'");
    }
  }
  if (static_cast<int>(coords.size()) != dim)
    throw FileFormatError("point has " + std::to_string(coords.size()) + " components, chart has " +
                          std::to_string(dim));
  return Point::doubles(std::move(coords));
}

// "i=expr;j=expr" for 1-forms, "i,j=expr;..." for 2-forms
DiffForm parse_form_map(const std::string& text, const Chart& chart, int degree) {
  DiffForm out(chart, degree);
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    if (entry.find_first_not_of(" \t") == std::string::npos) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw FileFormatError("malformed component '" + entry + "' (expected idx=expr)");
    const std::string key = entry.substr(0, eq);
    const std::string expr_text = entry.substr(eq + 1);
    IndexTuple idx;
    std::stringstream ks(key);
    std::string part;
    while (std::getline(ks, part, ',')) {
      try {
        idx.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw FileFormatError("malformed index '" + part + "'");
      }
    }
    if (static_cast<int>(idx.size()) != degree)
      throw FileFormatError("component '" + key + "' does not match form degree " +
                            std::to_string(degree));
    for (int i : idx)
      if (i < 0 || i >= chart.dim()) throw FileFormatError("index out of range in '" + key + "'");
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (idx[k - 1] >= idx[k]) throw FileFormatError("indices not increasing in '" + key + "'");
    out.set(idx, out.coeff(idx) + parse(expr_text, chart));
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto beg = item.find_first_not_of(" \t");
    const auto end = item.find_last_not_of(" \t");
    if (beg == std::string::npos) throw FileFormatError("empty coordinate name");
    names.push_back(item.substr(beg, end - beg + 1));
  }
  return names;
}

void emit_structure(const TwistedJacobiStructure& s, const std::string& out_path) {
  const StructureFile f = to_structure_file(s);
  if (out_path.empty()) {
    write_structure_file(std::cout, f);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write '" + out_path + "'");
    write_structure_file(out, f);
    std::cout << "wrote: " << out_path << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"twisted Jacobi structures: verification, brackets, foliation analysis"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  std::uint64_t seed = default_seed();
  std::string file, f_text, g_text, h_text, point_text, out_path;
  std::string coords_text, theta_text, omega_text, big_theta_text;
  int steps = 4000;
  double step_size = 1e-2;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "seed for sampling-based zero tests");
  };

  CLI::App* c_verify = app.add_subcommand("verify", "check the defining identities");
  c_verify->set_help_flag("--help");
  c_verify->add_option("file", file, "structure file")->required();
  add_seed(c_verify);

  CLI::App* c_bracket = app.add_subcommand("bracket", "evaluate {f,g}");
  c_bracket->set_help_flag("--help");
  c_bracket->add_option("file", file)->required();
  c_bracket->add_option("-f", f_text, "first function")->required();
  c_bracket->add_option("-g", g_text, "second function")->required();

  CLI::App* c_jac = app.add_subcommand("jacobiator", "check the Jacobiator-defect identity");
  c_jac->set_help_flag("--help");
  c_jac->add_option("file", file)->required();
  c_jac->add_option("-f", f_text)->required();
  c_jac->add_option("-g", g_text)->required();
  c_jac->add_option("-h", h_text)->required();
  add_seed(c_jac);

  CLI::App* c_classify = app.add_subcommand("classify", "classify a transitive structure");
  c_classify->set_help_flag("--help");
  c_classify->add_option("file", file)->required();
  add_seed(c_classify);

  CLI::App* c_rank = app.add_subcommand("rank", "characteristic distribution rank at a point");
  c_rank->set_help_flag("--help");
  c_rank->add_option("file", file)->required();
  c_rank->add_option("--point", point_text, "comma-separated coordinates")->required();

  CLI::App* c_leaf = app.add_subcommand("leaf", "trace a characteristic leaf, export CSV");
  c_leaf->set_help_flag("--help");
  c_leaf->add_option("file", file)->required();
  c_leaf->add_option("--point", point_text)->required();
  c_leaf->add_option("--steps", steps, "total integration steps");
  c_leaf->add_option("--step", step_size, "step size");
  c_leaf->add_option("--out", out_path, "CSV output path (default stdout)");
  add_seed(c_leaf);

  CLI::App* c_mkcontact = app.add_subcommand("make-contact", "build a twisted contact structure");
  c_mkcontact->set_help_flag("--help");
  c_mkcontact->add_option("--coords", coords_text, "comma-separated coordinate names")->required();
  c_mkcontact->add_option("--theta", theta_text, "1-form, \"i=expr;...\"")->required();
  c_mkcontact->add_option("--omega", omega_text, "2-form, \"i,j=expr;...\"");
  c_mkcontact->add_option("--out", out_path, "structure file output path (default stdout)");
  add_seed(c_mkcontact);

  CLI::App* c_mklcs = app.add_subcommand("make-lcs", "build a twisted LCS structure");
  c_mklcs->set_help_flag("--help");
  c_mklcs->add_option("--coords", coords_text)->required();
  c_mklcs->add_option("--big-theta", big_theta_text, "nondegenerate 2-form")->required();
  c_mklcs->add_option("--theta", theta_text, "closed 1-form")->required();
  c_mklcs->add_option("--omega", omega_text, "2-form");
  c_mklcs->add_option("--out", out_path, "structure file output path (default stdout)");
  add_seed(c_mklcs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;

  if (c_verify->parsed()) {
    LoadedStructure in = load(file);
    print_header("verify", file, in.digest, seed);
    VerificationReport report = verify_structure(in.structure, seed);
    print_report(report);
    code = finish(report.passed());
  } else if (c_bracket->parsed()) {
    LoadedStructure in = load(file);
    print_header("bracket", file, in.digest, std::nullopt);
    const ScalarExpr f = parse(f_text, in.structure.chart);
    const ScalarExpr g = parse(g_text, in.structure.chart);
    std::cout << "f: " << f.str() << "\n";
    std::cout << "g: " << g.str() << "\n";
    std::cout << "bracket: " << bracket_fun(in.structure, f, g).str() << "\n";
    code = finish(true);
  } else if (c_jac->parsed()) {
    LoadedStructure in = load(file);
    print_header("jacobiator", file, in.digest, seed);
    if (!verify_structure(in.structure, seed).passed())
      std::cout << "warning: structure residuals nonzero; identity not expected to hold\n";
    const ScalarExpr f = parse(f_text, in.structure.chart);
    const ScalarExpr g = parse(g_text, in.structure.chart);
    const ScalarExpr h = parse(h_text, in.structure.chart);
    JacobiatorResult r = jacobiator_check(in.structure, f, g, h, seed);
    std::cout << "lhs: " << r.lhs.str() << "\n";
    std::cout << "rhs: " << r.rhs.str() << "\n";
    std::cout << "status: " << to_string(r.residual.status) << "\n";
    code = finish(r.residual.status != ZeroStatus::NonZero);
  } else if (c_classify->parsed()) {
    LoadedStructure in = load(file);
    print_header("classify", file, in.digest, seed);
    TransitiveClassification cl = classify_transitive(in.structure, seed);
    std::cout << "parity: " << to_string(cl.parity) << "\n";
    std::cout << "theta: " << cl.theta.str() << "\n";
    std::cout << "Theta: " << cl.big_theta.str() << "\n";
    print_report(cl.residuals);
    code = finish(cl.residuals.passed());
  } else if (c_rank->parsed()) {
    LoadedStructure in = load(file);
    print_header("rank", file, in.digest, std::nullopt);
    const Point p = parse_point(point_text, in.structure.chart.dim());
    std::cout << "point: " << p.str() << "\n";
    std::cout << "rank: " << rank_at(in.structure, p) << "\n";
    code = finish(true);
  } else if (c_leaf->parsed()) {
    LoadedStructure in = load(file);
    print_header("leaf", file, in.digest, seed);
    const Point p = parse_point(point_text, in.structure.chart.dim());
    TraceControls controls;
    controls.step = step_size;
    controls.seed = seed;
    controls.steps_per_flow = std::min(steps, 200);
    controls.flows = (steps + controls.steps_per_flow - 1) / controls.steps_per_flow;
    LeafSample sample = trace_leaf(in.structure, p, controls);
    // trim to the requested step budget
    while (static_cast<int>(sample.steps.size()) > steps) sample.steps.pop_back();
    std::cout << "point: " << p.str() << "\n";
    std::cout << "steps: " << sample.steps.size() << "\n";
    std::cout << "truncated: " << (sample.truncated ? "yes" : "no") << "\n";
    if (sample.truncated) std::cout << "truncation: " << sample.truncation_reason << "\n";
    if (sample.rank_drop) std::cout << "note: rank changed along the trace\n";
    int max_rank = 0;
    for (const auto& st : sample.steps) max_rank = std::max(max_rank, st.rank);
    std::cout << "leaf-dimension: " << max_rank << "\n";
    if (out_path.empty()) {
      write_leaf_csv(std::cout, sample);
    } else {
      std::ofstream out(out_path);
      if (!out) throw Error("cannot write '" + out_path + "'");
      write_leaf_csv(out, sample);
      std::cout << "csv: " << out_path << "\n";
    }
    code = finish(!sample.truncated);
  } else if (c_mkcontact->parsed()) {
    print_header("make-contact", "", "", seed);
    Chart chart(split_names(coords_text));
    DiffForm theta = parse_form_map(theta_text, chart, 1);
    DiffForm omega = parse_form_map(omega_text, chart, 2);
    TwistedJacobiStructure s = from_twisted_contact(TwistedContactData(chart, theta, omega), seed);
    print_report(verify_structure(s, seed));
    emit_structure(s, out_path);
    code = finish(true);
  } else if (c_mklcs->parsed()) {
    print_header("make-lcs", "", "", seed);
    Chart chart(split_names(coords_text));
    DiffForm big_theta = parse_form_map(big_theta_text, chart, 2);
    DiffForm theta = parse_form_map(theta_text, chart, 1);
    DiffForm omega = parse_form_map(omega_text, chart, 2);
    TwistedJacobiStructure s =
        from_twisted_lcs(TwistedLcsData(chart, big_theta, theta, omega), seed);
    print_report(verify_structure(s, seed));
    emit_structure(s, out_path);
    code = finish(true);
  }

  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "elapsed_ms: %.1f\n", ms);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tjm::FileFormatError& e) {
    std::cout << "error: " << e.what() << "\n";
    return 2;
  } catch (const tjm::ParseError& e) {
    std::cout << "error: " << e.what() << "\n";
    return 2;
  } catch (const tjm::Error& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
