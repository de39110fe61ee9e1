// Command-line front end: best finite-section constants, breakdown indices,
// hypothesis reports, asymptotic fits and extremal vectors as CSV or JSON.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carleman/carleman.hpp"

namespace {

namespace cm = carleman;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitHypothesis = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitUsage = 64;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output tables

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> footer;
};

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return csv_field(v); }
  } visitor;
  return std::visit(visitor, c);
}

json cell_json(const Cell& c) {
  struct {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(std::int64_t v) const { return v; }
    json operator()(double v) const {
      if (std::isfinite(v)) return v;
      return format_double(v);
    }
    json operator()(const std::string& v) const { return v; }
  } visitor;
  return std::visit(visitor, c);
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
  for (const auto& [key, value] : t.footer) os << "# " << key << '=' << cell_text(value) << '\n';
}

void write_json(std::ostream& os, const Table& t, const std::string& command, const std::string& weights) {
  json doc;
  doc["command"] = command;
  doc["weights"] = weights;
  doc["columns"] = t.columns;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  json footer = json::object();
  for (const auto& [key, value] : t.footer) footer[key] = cell_json(value);
  doc["footer"] = std::move(footer);
  os << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Option parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw UsageError("bad " + what + ": '" + s + "'");
  return v;
}

// Accepts plain integers and exact scientific forms such as 1e6.
std::size_t parse_count(const std::string& s, const std::string& what) {
  const double v = parse_real(s, what);
  if (!(v >= 1.0) || v > 1e15 || v != std::floor(v)) throw UsageError("bad " + what + ": '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item, what));
  if (out.empty()) throw UsageError("empty " + what + " list");
  return out;
}

std::vector<std::size_t> parse_count_list(const std::string& s, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_count(item, what));
  if (out.empty()) throw UsageError("empty " + what + " list");
  return out;
}

std::vector<std::size_t> parse_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw UsageError("--n-range expects start:stop:step, got '" + s + "'");
  const std::size_t start = parse_count(parts[0], "range start");
  const std::size_t stop = parse_count(parts[1], "range stop");
  const std::size_t step = parse_count(parts[2], "range step");
  if (stop < start) throw UsageError("--n-range stop is below start");
  std::vector<std::size_t> out;
  for (std::size_t n = start; n <= stop; n += step) out.push_back(n);
  return out;
}

struct SharedOptions {
  std::string weights = "unit";
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 0;
  std::size_t kmax = 10000;
  std::size_t cap = 10'000'000;
  double tol = 0.0;
};

struct Context {
  SharedOptions opt;
  cm::WeightSequence seq = cm::WeightSequence::unit();
  cm::WeightConstants consts;
  cm::SectionOptions section;
};

Context make_context(const SharedOptions& opt, bool need_constants = true) {
  Context ctx{opt, cm::parse_weight_spec(opt.weights), {}, {}};
  if (!(opt.tol >= 0.0)) throw UsageError("--tol must be non-negative");
  ctx.section.rel_tol = opt.tol;
  if (need_constants) ctx.consts = cm::estimate_constants(ctx.seq, std::max<std::size_t>(opt.kmax, 100));
  return ctx;
}

void add_constants_footer(Table& t, const cm::WeightConstants& c) {
  t.footer.emplace_back("M", c.M);
  t.footer.emplace_back("M_source", std::string(c.M_source == cm::ConstantSource::closed_form ? "closed_form" : "estimated"));
  t.footer.emplace_back("M_tail_limit", std::string(c.M_tail_limit ? "true" : "false"));
  t.footer.emplace_back("C", c.C);
  t.footer.emplace_back("C_source", std::string(c.C_source == cm::ConstantSource::closed_form ? "closed_form" : "estimated"));
  t.footer.emplace_back("C_error_estimate", c.C_error_estimate);
}

// ---------------------------------------------------------------------------
// Subcommands

Table cmd_mu(Context& ctx, const std::vector<std::size_t>& ns) {
  Table t;
  t.columns = {"N", "mu_N", "residual", "iterations"};
  for (std::size_t n : ns) {
    const auto s = cm::section_constant(ctx.seq, ctx.consts, n, 1.0, ctx.section);
    t.rows.push_back({static_cast<std::int64_t>(s.N), s.mu_N, s.residual, static_cast<std::int64_t>(s.iterations)});
  }
  add_constants_footer(t, ctx.consts);
  return t;
}

Table cmd_hypotheses(Context& ctx, bool& all_passed) {
  Table t;
  t.columns = {"id", "status", "first_k", "last_k", "margin", "statistic", "witness_k", "witness_lhs", "witness_rhs",
               "description"};
  const auto report = cm::check_hypotheses(ctx.seq, ctx.consts, ctx.opt.kmax);
  for (const auto& e : report.entries) {
    std::vector<Cell> row{e.id, std::string(cm::to_string(e.status)), static_cast<std::int64_t>(e.first_k),
                          static_cast<std::int64_t>(e.last_k)};
    row.push_back(e.margin ? Cell(*e.margin) : Cell());
    row.push_back(e.statistic ? Cell(*e.statistic) : Cell());
    if (e.witness) {
      row.push_back(static_cast<std::int64_t>(e.witness->k));
      row.push_back(e.witness->lhs);
      row.push_back(e.witness->rhs);
    } else {
      row.insert(row.end(), 3, Cell());
    }
    row.push_back(e.description);
    t.rows.push_back(std::move(row));
  }
  all_passed = report.all_passed();
  add_constants_footer(t, ctx.consts);
  t.footer.emplace_back("all_passed", std::string(all_passed ? "true" : "false"));
  return t;
}

// Hypothesis table for a sequence whose constants could not be determined.
Table hypotheses_without_constants(const std::string& reason) {
  Table t;
  t.columns = {"id", "status", "description"};
  t.rows.push_back({std::string("sup_M"), std::string("fail"), "M could not be determined: " + reason});
  t.footer.emplace_back("all_passed", std::string("false"));
  return t;
}

Table cmd_breakdown(Context& ctx, const std::vector<double>& mus) {
  Table t;
  t.columns = {"mu", "N_mu", "status", "log_N_mu", "predicted_log_N_mu"};
  const double e_m = ctx.consts.exp_M();
  for (double mu : mus) {
    if (!(mu > 0.0)) throw UsageError("--mu values must be positive");
    const auto r = cm::breakdown_index(ctx.seq, mu, ctx.opt.cap);
    std::vector<Cell> row{mu};
    if (r.index) {
      row.push_back(static_cast<std::int64_t>(*r.index));
      row.push_back(std::string("breakdown"));
      row.push_back(std::log(static_cast<double>(*r.index)));
    } else {
      row.push_back(std::string("INF"));
      row.push_back(std::string(mu >= e_m ? "no_breakdown_mu_at_least_e^M" : "cap_reached"));
      row.push_back(Cell());
    }
    row.push_back(mu < e_m ? Cell(cm::predicted_log_breakdown(ctx.consts, mu)) : Cell());
    t.rows.push_back(std::move(row));
  }
  add_constants_footer(t, ctx.consts);
  t.footer.emplace_back("cap", static_cast<std::int64_t>(ctx.seq.clamp_index(ctx.opt.cap)));
  return t;
}

Table cmd_asymptotic(Context& ctx, const std::vector<std::size_t>& grid) {
  const auto fit = cm::fit_residual(ctx.seq, ctx.consts, grid, ctx.section);
  Table t;
  t.columns = {"N", "mu_exact", "mu_predicted", "r"};
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    const auto p = cm::predicted_mu(ctx.consts, fit.grid[i]);
    t.rows.push_back({static_cast<std::int64_t>(fit.grid[i]), fit.mu_values[i], p.mu_predicted, fit.r_values[i]});
  }
  t.footer.emplace_back("fitted_A", fit.fitted_A);
  t.footer.emplace_back("fitted_B", fit.fitted_B);
  t.footer.emplace_back("fit_rms", fit.fit_rms);
  t.footer.emplace_back("target_A", fit.target_A);
  add_constants_footer(t, ctx.consts);
  return t;
}

Table cmd_extremal(Context& ctx, std::size_t n, int restarts) {
  const auto s = cm::section_constant(ctx.seq, ctx.consts, n, 1.0, ctx.section);
  const auto v = cm::reconstruct_extremal(ctx.seq, s.mu_N, n);
  Table t;
  t.columns = {"k", "a_k", "G_k"};
  for (std::size_t k = 0; k < v.N; ++k) t.rows.push_back({static_cast<std::int64_t>(k + 1), v.a[k], v.G[k]});
  t.footer.emplace_back("mu_N", s.mu_N);
  t.footer.emplace_back("objective", v.objective);
  t.footer.emplace_back("stationarity_residual", cm::verify_stationarity(ctx.seq, v, s.mu_N));
  if (n <= 8) {
    cm::OracleOptions oo;
    oo.seed = ctx.opt.seed;
    const auto o = cm::oracle_maximize(ctx.seq, n, restarts, oo);
    t.footer.emplace_back("oracle_objective", o.objective);
    t.footer.emplace_back("oracle_gap", std::abs(o.objective - v.objective));
  }
  return t;
}

Table cmd_theta(Context& ctx, const std::vector<double>& mus, const std::string& y_text) {
  Table t;
  t.columns = {"mu", "M", "y", "theta", "leading_term"};
  const double M = ctx.consts.M;
  const bool infinite = y_text == "inf" || y_text == "INF";
  const double y = infinite ? INFINITY : parse_real(y_text, "--y");
  for (double mu : mus) {
    const double th = infinite ? cm::theta_infinity(mu, M) : cm::theta(y, mu, M);
    const Cell lead = mu < std::exp(M) ? Cell(cm::theta_infinity_leading(mu, M)) : Cell();
    t.rows.push_back({mu, M, infinite ? Cell(std::string("inf")) : Cell(y), th, lead});
  }
  return t;
}

// ---------------------------------------------------------------------------

void emit(const Table& t, const Context& ctx, const std::string& command) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!ctx.opt.out.empty()) {
    file.open(ctx.opt.out, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + ctx.opt.out + "'");
    os = &file;
  }
  if (ctx.opt.format == "json")
    write_json(*os, t, command, ctx.seq.describe());
  else
    write_csv(*os, t);
  os->flush();
}

void add_shared(CLI::App* app, SharedOptions& opt) {
  app->add_option("--weights", opt.weights, "unit | power:alpha=<float> | file:<path>");
  app->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--out", opt.out, "write output to this path instead of stdout");
  app->add_option("--seed", opt.seed, "seed for the oracle's random restarts");
  app->add_option("--kmax", opt.kmax, "index range for constant estimation and hypothesis checks");
  app->add_option("--cap", opt.cap, "largest index examined by the breakdown search");
  app->add_option("--tol", opt.tol, "bisection bracket width relative to e^M (0 = to adjacent doubles)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best constants of finite sections of the weighted Carleman inequality"};
  app.require_subcommand(1);

  SharedOptions opt;
  std::string n_text, range_text, mu_text, grid_text, y_text = "inf";
  int restarts = 8;

  auto* mu_cmd = app.add_subcommand("mu", "best constant mu_N for one N or a range");
  add_shared(mu_cmd, opt);
  auto* mu_n = mu_cmd->add_option("--n", n_text, "section length N");
  auto* mu_range = mu_cmd->add_option("--n-range", range_text, "start:stop:step (inclusive)");
  mu_n->excludes(mu_range);

  auto* hyp_cmd = app.add_subcommand("hypotheses", "check the structural hypotheses on the weights");
  add_shared(hyp_cmd, opt);

  auto* bd_cmd = app.add_subcommand("breakdown", "breakdown index N_mu for a list of mu");
  add_shared(bd_cmd, opt);
  bd_cmd->add_option("--mu", mu_text, "comma-separated mu values")->required();

  auto* as_cmd = app.add_subcommand("asymptotic", "exact mu_N against the two-term expansion");
  add_shared(as_cmd, opt);
  as_cmd->add_option("--grid", grid_text, "comma-separated N values, e.g. 1e3,1e4,1e5,1e6")->required();

  auto* ex_cmd = app.add_subcommand("extremal", "optimising vector for the N-term section");
  add_shared(ex_cmd, opt);
  ex_cmd->add_option("--n", n_text, "section length N")->required();
  ex_cmd->add_option("--restarts", restarts, "random restarts of the oracle (N <= 8)");

  auto* th_cmd = app.add_subcommand("theta", "the integral theta(y) = int_0^y dx/(e^x/mu - x + M - 1)");
  add_shared(th_cmd, opt);
  th_cmd->add_option("--mu", mu_text, "comma-separated mu values")->required();
  th_cmd->add_option("--y", y_text, "upper limit, or inf");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string command;
  try {
    if (mu_cmd->parsed()) {
      command = "mu";
      std::vector<std::size_t> ns;
      if (!n_text.empty())
        ns.push_back(parse_count(n_text, "--n"));
      else if (!range_text.empty())
        ns = parse_range(range_text);
      else
        throw UsageError("mu needs --n or --n-range");
      Context ctx = make_context(opt);
      emit(cmd_mu(ctx, ns), ctx, command);
      return kExitOk;
    }
    if (hyp_cmd->parsed()) {
      command = "hypotheses";
      Context ctx = make_context(opt, false);
      bool passed = false;
      try {
        ctx.consts = cm::estimate_constants(ctx.seq, std::max<std::size_t>(opt.kmax, 100));
      } catch (const cm::NumericError& e) {
        emit(hypotheses_without_constants(e.what()), ctx, command);
        std::cerr << "hypothesis failure: " << e.what() << '\n';
        return kExitHypothesis;
      }
      const Table t = cmd_hypotheses(ctx, passed);
      emit(t, ctx, command);
      if (!passed) {
        for (const auto& row : t.rows) {
          if (std::get<std::string>(row[1]) == "fail")
            std::cerr << "hypothesis failure: " << std::get<std::string>(row[0]) << '\n';
        }
        return kExitHypothesis;
      }
      return kExitOk;
    }
    if (bd_cmd->parsed()) {
      command = "breakdown";
      Context ctx = make_context(opt);
      emit(cmd_breakdown(ctx, parse_real_list(mu_text, "--mu")), ctx, command);
      return kExitOk;
    }
    if (as_cmd->parsed()) {
      command = "asymptotic";
      const auto grid = parse_count_list(grid_text, "--grid");
      cm::validate_fit_grid(grid);
      Context ctx = make_context(opt);
      emit(cmd_asymptotic(ctx, grid), ctx, command);
      return kExitOk;
    }
    if (ex_cmd->parsed()) {
      command = "extremal";
      if (restarts < 0) throw UsageError("--restarts must be non-negative");
      Context ctx = make_context(opt);
      emit(cmd_extremal(ctx, parse_count(n_text, "--n"), restarts), ctx, command);
      return kExitOk;
    }
    if (th_cmd->parsed()) {
      command = "theta";
      Context ctx = make_context(opt);
      emit(cmd_theta(ctx, parse_real_list(mu_text, "--mu"), y_text), ctx, command);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cm::PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cm::WeightSpecError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cm::WeightError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cm::NumericError& e) {
    std::cerr << "numeric failure in " << command << ": " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
