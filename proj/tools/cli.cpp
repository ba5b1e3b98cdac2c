#include "cli.hpp"

#include "memchain/dde.hpp"
#include "memchain/embed.hpp"
#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"
#include "memchain/me_solver.hpp"
#include "memchain/serialize.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace memchain::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json complex_list(std::span<const cplx> zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Inline JSON when the argument starts with '{' or '[', otherwise a path.
json json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return parse_json(arg);
  return parse_json(slurp(arg));
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Trajectory& traj,
               const std::vector<std::vector<double>>& extra = {}) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (std::size_t s = 0; s < traj.size(); ++s) {
    os << fmt(traj.time(s));
    for (double v : traj.sample(s)) os << ',' << fmt(v);
    for (const auto& col : extra) os << ',' << fmt(col[s]);
    os << '\n';
  }
}

// Sources shared by several subcommands.
struct ModelArgs {
  std::string loop, generator, kernel, input;
  double a = std::numeric_limits<double>::quiet_NaN();
};

void add_loop_options(CLI::App* sub, ModelArgs& m, bool with_generator, bool with_kernel) {
  sub->add_option("--loop", m.loop, "loop JSON (inline or path): {\"a\":[...],\"b\":[...]}");
  if (with_generator) sub->add_option("--generator", m.generator, "generator JSON (inline or path)");
  if (with_kernel) {
    sub->add_option("--a", m.a, "decay rate of the memory equation");
    sub->add_option("--kernel", m.kernel, "kernel JSON (inline or path)");
    sub->add_option("--input", m.input, "document {\"a\": ..., \"kernel\": {...}}");
  }
}

struct MemoryEquation {
  double a = 0.0;
  ExpPolyKernel kernel;
  std::optional<LoopGenerator> loop;
};

MemoryEquation memory_equation(const ModelArgs& m) {
  if (!m.loop.empty()) {
    LoopGenerator gen = loop_from_json(json_arg(m.loop));
    return {gen.total_split_rate(), LoopKernel(gen).flatten(), gen};
  }
  if (!m.input.empty()) {
    const json doc = json_arg(m.input);
    if (!doc.is_object() || !doc.contains("a") || !doc["a"].is_number()) {
      throw Error(ErrorCode::ParseError, "input.a: expected a number");
    }
    if (!doc.contains("kernel")) throw Error(ErrorCode::ParseError, "input.kernel: missing");
    return {doc["a"].get<double>(), kernel_from_json(doc["kernel"]), std::nullopt};
  }
  if (!m.kernel.empty()) {
    if (std::isnan(m.a)) throw UsageError("--kernel requires --a");
    return {m.a, kernel_from_json(json_arg(m.kernel)), std::nullopt};
  }
  throw UsageError("one of --loop, --kernel/--a or --input is required");
}

GeneratorMatrix generator_of(const ModelArgs& m) {
  if (!m.generator.empty()) return generator_from_json(json_arg(m.generator));
  if (!m.loop.empty()) return build_generator(loop_from_json(json_arg(m.loop)));
  throw UsageError("one of --loop or --generator is required");
}

LoopGenerator embedded_loop(const MemoryEquation& me) {
  if (me.loop) return *me.loop;
  return me_to_mp(me.a, me.kernel, 1.0).loop;
}

json attempt_json(const OrderingAttempt& at) {
  return json{{"return_rates", at.return_rates},
              {"split_rates", at.split_rates},
              {"most_negative", at.most_negative},
              {"feasible", at.feasible}};
}

// ---------------------------------------------------------------------------

int cmd_mp2me(const ModelArgs& m, std::ostream& os) {
  if (m.loop.empty()) throw UsageError("--loop is required");
  const LoopGenerator gen = loop_from_json(json_arg(m.loop));
  json doc = to_json(LoopKernel(gen).flatten());
  doc["a"] = gen.total_split_rate();
  os << doc.dump(2) << '\n';
  return 0;
}

int cmd_me2mp(const ModelArgs& m, double u0, std::ostream& os) {
  const MemoryEquation me = memory_equation(m);
  try {
    const EmbeddedChain chain = me_to_mp(me.a, me.kernel, u0);
    json doc = to_json(chain.generator);
    doc["status"] = "feasible";
    doc["loop"] = to_json(chain.loop)["loop"];
    doc["initial"] = std::vector<double>(chain.initial.masses().begin(), chain.initial.masses().end());
    os << doc.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    const Decomposition dec = decompose_to_loop(me.kernel, false);
    json certs = json::array();
    for (const auto& at : dec.attempts) certs.push_back(attempt_json(at));
    json doc{{"status", "infeasible"},
             {"message", e.what()},
             {"exhaustive", dec.exhaustive},
             {"certificates", certs}};
    os << doc.dump(2) << '\n';
    return 1;
  }
}

struct SolveArgs {
  std::string method = "volterra";
  double h = 1e-3;
  double t_end = 10.0;
  double u0 = 1.0;
  std::string summary;
};

int cmd_solve(const ModelArgs& m, const SolveArgs& s, std::ostream& os) {
  if (!(s.h > 0.0) || !(s.t_end > 0.0)) throw UsageError("--h and --t-end must be positive");
  const MemoryEquation me = memory_equation(m);
  const UniformGrid grid = UniformGrid::covering(s.t_end, s.h);

  std::optional<Trajectory> traj;
  if (s.method == "volterra") {
    traj = solve_me(me.a, me.kernel, s.u0, grid);
  } else if (s.method == "chain") {
    const LoopGenerator gen = embedded_loop(me);
    std::vector<double> p0(gen.states(), 0.0);
    p0[0] = s.u0;
    const auto times = grid.times();
    const Trajectory full = integrate(build_generator(gen), ProbabilityVector(std::move(p0)), times);
    traj.emplace(times, 1);
    for (std::size_t i = 0; i < full.size(); ++i) traj->at(i, 0) = full.at(i, 0);
  } else {
    const auto modes = closed_form(embedded_loop(me), s.u0);
    traj.emplace(grid.times(), 1);
    for (std::size_t i = 0; i < traj->size(); ++i) traj->at(i, 0) = evaluate_modes(modes, traj->time(i));
  }

  if (!s.summary.empty()) {
    const LoopGenerator gen = embedded_loop(me);
    json doc{{"method", s.method}, {"u_infinity", equilibrium_me(gen, s.u0)}};
    try {
      const auto modes = closed_form(gen, s.u0);
      std::vector<cplx> poles, residues;
      for (const auto& md : modes) {
        poles.push_back(md.pole);
        residues.push_back(md.residue);
      }
      doc["poles"] = complex_list(poles);
      doc["residues"] = complex_list(residues);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RepeatedPoles) throw;
      doc["poles"] = nullptr;
      doc["residues"] = nullptr;
    }
    std::ofstream f(s.summary, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + s.summary + "'");
    f << doc.dump(2) << '\n';
  }

  write_csv(os, {"t", "u"}, *traj);
  return 0;
}

struct CyclicArgs {
  bool cyclic = false;
  double a = 1.0, T = 1.0;
  std::size_t N = 1;
};

int cmd_spectrum(const ModelArgs& m, const CyclicArgs& c, std::ostream& os) {
  std::vector<cplx> ev;
  if (c.cyclic) {
    ev = cyclic_spectrum(c.a, c.T, c.N);
  } else {
    ev = spectrum(generator_of(m));
  }
  os << json{{"eigenvalues", complex_list(ev)}}.dump(2) << '\n';
  return 0;
}

int cmd_stationary(const ModelArgs& m, double u0, std::ostream& os) {
  const GeneratorMatrix A = generator_of(m);
  const ProbabilityVector mu = stationary(A, u0);
  json doc{{"stationary", std::vector<double>(mu.masses().begin(), mu.masses().end())}};
  if (auto loop = as_loop(A)) doc["Z"] = partition_constant(*loop);
  const DetailedBalance db = detailed_balance(A, mu);
  doc["detailed_balance"] = db.holds;
  os << doc.dump(2) << '\n';
  return 0;
}

json positivity_json(const ExpPolyKernel& K, double horizon) {
  const PositivityReport rep = positivity_check(K, horizon);
  json doc{{"positive", rep.positive},
           {"min_value", rep.min_value},
           {"argmin", rep.argmin},
           {"horizon", rep.horizon},
           {"tail_certified", rep.tail_certified},
           {"mass", kernel_mass(K)}};
  try {
    doc["mean_time"] = moments(K).mean_time;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroMass) throw;
    doc["mean_time"] = nullptr;
  }
  return doc;
}

int cmd_check(const ModelArgs& m, std::ostream& os) {
  json doc;
  std::optional<GeneratorMatrix> A;
  if (!m.generator.empty()) {
    A = generator_from_json(json_arg(m.generator));
    if (auto loop = as_loop(*A)) {
      doc["kernel"] = positivity_json(LoopKernel(*loop).flatten(), 0.0);
      doc["mass_consistency"] = {{"a", loop->total_split_rate()}, {"mass", loop->total_split_rate()}, {"consistent", true}};
    }
  } else {
    const MemoryEquation me = memory_equation(m);
    doc["kernel"] = positivity_json(me.kernel, 0.0);
    const double mass = kernel_mass(me.kernel);
    const bool consistent = std::abs(mass - me.a) <= 1e-9 * std::max(1.0, std::abs(me.a));
    doc["mass_consistency"] = {{"a", me.a}, {"mass", mass}, {"consistent", consistent}};
    if (me.loop) {
      A = build_generator(*me.loop);
    } else if (consistent && me.kernel.is_exponential_sum()) {
      const Decomposition dec = decompose_to_loop(me.kernel);
      doc["embeddable"] = dec.loop.has_value();
      if (dec.loop) A = build_generator(*dec.loop);
    }
  }
  if (A) {
    const DetailedBalance db = detailed_balance(*A, stationary(*A, 1.0));
    doc["detailed_balance"] = {{"holds", db.holds}, {"max_violation", db.max_violation}};
  }
  os << doc.dump(2) << '\n';
  return 0;
}

struct KernelArgs {
  std::vector<std::size_t> erlang;
  double T = 1.0;
  double t_end = 10.0;
  std::size_t intervals = 1000;
  std::vector<double> at;
  double horizon = 0.0;
  double weight = 0.0;
  CLI::Option* weight_opt = nullptr;
};

ExpPolyKernel kernel_source(const ModelArgs& m, const KernelArgs& k) {
  if (!k.erlang.empty()) {
    if (k.erlang.size() != 1) throw UsageError("this action takes a single --erlang order");
    return erlang_kernel(k.erlang.front(), k.T);
  }
  if (!m.loop.empty()) return LoopKernel(loop_from_json(json_arg(m.loop))).flatten();
  if (!m.kernel.empty()) return kernel_from_json(json_arg(m.kernel));
  throw UsageError("one of --kernel, --loop or --erlang is required");
}

int cmd_kernel_eval(const ModelArgs& m, const KernelArgs& k, std::ostream& os) {
  if (k.intervals == 0 || !(k.t_end > 0.0)) throw UsageError("--intervals and --t-end must be positive");
  std::vector<std::string> header{"t"};
  std::vector<ExpPolyKernel> columns;
  if (k.erlang.size() > 1) {
    for (std::size_t N : k.erlang) {
      header.push_back("K" + std::to_string(N));
      columns.push_back(erlang_kernel(N, k.T));
    }
  } else if (!m.loop.empty() && k.erlang.empty()) {
    const LoopKernel lk(loop_from_json(json_arg(m.loop)));
    header.push_back("K");
    columns.push_back(lk.flatten());
    for (std::size_t j = 1; j <= lk.generator().loops(); ++j) {
      header.push_back("K" + std::to_string(j));
      columns.push_back(lk.component(j));
    }
  } else {
    header.push_back("K");
    columns.push_back(kernel_source(m, k));
  }
  const UniformGrid grid{k.t_end / static_cast<double>(k.intervals), k.intervals};
  Trajectory traj(grid.times(), columns.size());
  for (std::size_t s = 0; s < traj.size(); ++s) {
    for (std::size_t c = 0; c < columns.size(); ++c) traj.at(s, c) = kernel_eval(columns[c], traj.time(s));
  }
  write_csv(os, header, traj);
  return 0;
}

int cmd_kernel_laplace(const ModelArgs& m, const KernelArgs& k, std::ostream& os) {
  const ExpPolyKernel K = kernel_source(m, k);
  const RationalFunction R = kernel_laplace(K);
  std::vector<double> num, den;
  for (int i = 0; i <= R.numerator().degree(); ++i) num.push_back(R.numerator()[static_cast<std::size_t>(i)]);
  for (int i = 0; i <= R.denominator().degree(); ++i) den.push_back(R.denominator()[static_cast<std::size_t>(i)]);
  json values = json::array();
  for (double x : k.at) values.push_back(json{{"x", x}, {"value", kernel_laplace_at(K, cplx(x, 0.0)).real()}});
  os << json{{"numerator", num}, {"denominator", den}, {"values", values}}.dump(2) << '\n';
  return 0;
}

int cmd_kernel_moments(const ModelArgs& m, const KernelArgs& k, std::ostream& os) {
  const KernelMoments mo = moments(kernel_source(m, k));
  os << json{{"mass", mo.mass}, {"mean_time", mo.mean_time}}.dump(2) << '\n';
  return 0;
}

int cmd_kernel_check(const ModelArgs& m, const KernelArgs& k, std::ostream& os) {
  const ExpPolyKernel K = kernel_source(m, k);
  json doc = positivity_json(K, k.horizon);
  if (k.weight_opt != nullptr && k.weight_opt->count() > 0) {
    const double horizon = k.horizon > 0.0 ? k.horizon : doc["horizon"].get<double>();
    const WeightedMinimum wm = weighted_minimum(K, k.weight, horizon);
    doc["weighted_minimum"] = {{"shift", k.weight}, {"value", wm.value}, {"argmin", wm.argmin}};
  }
  os << doc.dump(2) << '\n';
  return 0;
}

struct DdeArgs {
  double a = 1.0, T = 1.0, h = 1e-3, u0 = 1.0;
  double t_end = 0.0;
  std::vector<std::size_t> N_list{5, 10, 20, 40};
  std::size_t roots = 8;
  std::string out_dir;
};

int cmd_dde(const DdeArgs& d, std::ostream& os) {
  if (d.N_list.empty()) throw UsageError("--N-list must not be empty");
  const double t_end = d.t_end > 0.0 ? d.t_end : 10.0 * d.T;
  const Trajectory dde = solve_dde(d.a, d.T, d.u0, t_end, d.h);
  const auto dde_roots = dde_char_roots(d.a, d.T, d.roots);
  const std::vector<cplx> dde_nonzero(dde_roots.begin() + 1, dde_roots.end());

  if (!d.out_dir.empty()) std::filesystem::create_directories(d.out_dir);
  auto open_csv = [&](const std::string& name) {
    std::ofstream f(std::filesystem::path(d.out_dir) / name, std::ios::binary);
    if (!f) throw UsageError("cannot write into '" + d.out_dir + "'");
    return f;
  };
  if (!d.out_dir.empty()) {
    auto f = open_csv("dde.csv");
    write_csv(f, {"t", "u"}, dde);
  }

  json sup = json::array(), dist = json::array(), chain_eq = json::array(), smallest = json::array();
  for (std::size_t N : d.N_list) {
    const Trajectory chain = chain_approximation(d.a, d.T, N, d.u0, dde.times());
    double err = 0.0;
    for (std::size_t s = 0; s < dde.size(); ++s) err = std::max(err, std::abs(chain.at(s, 0) - dde.at(s, 0)));
    sup.push_back(err);

    const auto ev = cyclic_spectrum(d.a, d.T, N);
    const auto lead = smallest_nonzero(ev, 1);
    const auto dd = match_roots(lead, dde_nonzero);
    dist.push_back(dd.empty() ? 0.0 : dd.front());
    smallest.push_back(complex_list(lead));

    const ProbabilityVector mu = stationary(build_cyclic_generator(d.a, static_cast<double>(N) / d.T, N), d.u0);
    chain_eq.push_back(mu[0]);

    if (!d.out_dir.empty()) {
      auto f = open_csv("chain_N" + std::to_string(N) + ".csv");
      write_csv(f, {"t", "u_chain", "u_dde"}, chain, {dde.component(0)});
    }
  }

  json doc{{"a", d.a},
           {"T", d.T},
           {"N", d.N_list},
           {"t_end", t_end},
           {"step", dde_step(d.T, d.h)},
           {"sup_errors", sup},
           {"root_distances", dist},
           {"cyclic_leading", smallest},
           {"dde_roots", complex_list(dde_roots)},
           {"equilibrium",
            {{"exact", d.u0 / (1.0 + d.a * d.T)}, {"dde_final", dde.at(dde.size() - 1, 0)}, {"chain", chain_eq}}}};
  os << doc.dump(2) << '\n';
  return 0;
}

struct SimArgs {
  double u0 = 1.0;
  std::vector<double> p0;
  double t_end = 10.0;
  std::size_t paths = 10000, intervals = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string errors;
};

ProbabilityVector initial_state(const SimArgs& s, std::size_t n) {
  if (!s.p0.empty()) {
    if (s.p0.size() != n) throw UsageError("--p0 needs " + std::to_string(n) + " entries");
    return ProbabilityVector(s.p0);
  }
  std::vector<double> p(n, 0.0);
  p[0] = s.u0;
  return ProbabilityVector(std::move(p));
}

std::vector<std::string> state_header(std::size_t n) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 0; i < n; ++i) h.push_back("state" + std::to_string(i));
  return h;
}

int cmd_simulate(const ModelArgs& m, const SimArgs& s, std::ostream& os) {
  const GeneratorMatrix A = generator_of(m);
  SimulationOptions opts;
  opts.paths = s.paths;
  opts.seed = s.seed;
  opts.intervals = s.intervals;
  opts.threads = s.threads;
  const EnsembleResult res = simulate_ctmc(A, initial_state(s, A.size()), s.t_end, opts);
  if (!s.errors.empty()) {
    std::ofstream f(s.errors, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + s.errors + "'");
    write_csv(f, state_header(A.size()), res.std_error);
  }
  write_csv(os, state_header(A.size()), res.mean);
  return 0;
}

int cmd_integrate(const ModelArgs& m, const SimArgs& s, std::ostream& os) {
  const GeneratorMatrix A = generator_of(m);
  if (s.intervals == 0 || !(s.t_end > 0.0)) throw UsageError("--intervals and --t-end must be positive");
  const UniformGrid grid{s.t_end / static_cast<double>(s.intervals), s.intervals};
  write_csv(os, state_header(A.size()), integrate(A, initial_state(s, A.size()), grid.times()));
  return 0;
}

void report_error(std::ostream& err, bool as_json, std::string_view code, const std::string& message) {
  if (as_json) {
    err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conversion between memory equations and loop-structured Markov chains", "memchain"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  bool json_errors = false;
  std::string out_path;
  app.add_flag("--json-errors", json_errors, "report errors as JSON on stderr");
  app.add_option("--out", out_path, "write the primary output to this path instead of stdout");

  ModelArgs model;
  double u0 = 1.0;

  auto* mp2me = app.add_subcommand("mp2me", "loop generator -> memory kernel");
  add_loop_options(mp2me, model, false, false);

  auto* me2mp = app.add_subcommand("me2mp", "memory equation -> loop generator (or infeasibility report)");
  add_loop_options(me2mp, model, false, true);
  me2mp->add_option("--u0", u0, "initial mass in state 0");

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "trajectory of the memory equation as CSV t,u");
  add_loop_options(solve, model, false, true);
  solve->add_option("--method", solve_args.method, "volterra | chain | closed-form")
      ->check(CLI::IsMember({"volterra", "chain", "closed-form"}));
  solve->add_option("--h", solve_args.h, "step size");
  solve->add_option("--t-end", solve_args.t_end, "final time");
  solve->add_option("--u0", solve_args.u0, "initial value");
  solve->add_option("--summary", solve_args.summary, "write {u_infinity, poles, residues} JSON here");

  CyclicArgs cyc;
  auto* spec = app.add_subcommand("spectrum", "eigenvalues of a generator");
  add_loop_options(spec, model, true, false);
  spec->add_flag("--cyclic", cyc.cyclic, "single long loop with N stages, rate N/T");
  spec->add_option("--a", cyc.a, "cyclic split rate");
  spec->add_option("--T", cyc.T, "cyclic delay");
  spec->add_option("--N", cyc.N, "cyclic stage count")->check(CLI::PositiveNumber);

  auto* stat = app.add_subcommand("stationary", "stationary state of a generator");
  add_loop_options(stat, model, true, false);
  stat->add_option("--u0", u0, "total mass");

  auto* check = app.add_subcommand("check", "positivity, detailed balance and mass consistency");
  add_loop_options(check, model, true, true);

  KernelArgs kargs;
  auto* kernel = app.add_subcommand("kernel", "kernel analysis");
  kernel->require_subcommand(1);
  auto add_kernel_source = [&](CLI::App* sub) {
    sub->add_option("--kernel", model.kernel, "kernel JSON (inline or path)");
    sub->add_option("--loop", model.loop, "loop JSON; uses its synthesized kernel");
    sub->add_option("--erlang", kargs.erlang, "Erlang orders N (unit mass, mean T)")->delimiter(',');
    sub->add_option("--T", kargs.T, "Erlang mean delay");
  };
  auto* k_eval = kernel->add_subcommand("eval", "CSV of K(t) on a uniform grid");
  add_kernel_source(k_eval);
  k_eval->add_option("--t-end", kargs.t_end, "final time");
  k_eval->add_option("--intervals", kargs.intervals, "number of grid intervals");
  auto* k_lap = kernel->add_subcommand("laplace", "Laplace transform as a rational function");
  add_kernel_source(k_lap);
  k_lap->add_option("--at", kargs.at, "real points at which to evaluate");
  auto* k_mom = kernel->add_subcommand("moments", "mass and mean time");
  add_kernel_source(k_mom);
  auto* k_chk = kernel->add_subcommand("check", "positivity report");
  add_kernel_source(k_chk);
  k_chk->add_option("--horizon", kargs.horizon, "search horizon (default 50 / min rate)");
  kargs.weight_opt = k_chk->add_option("--weight", kargs.weight, "also minimize e^{w t} K(t)");

  DdeArgs dargs;
  auto* dde = app.add_subcommand("dde", "delay equation versus cyclic chains");
  dde->add_option("--a", dargs.a, "decay rate");
  dde->add_option("--T", dargs.T, "delay");
  dde->add_option("--N-list", dargs.N_list, "stage counts")->delimiter(',');
  dde->add_option("--h", dargs.h, "step size");
  dde->add_option("--t-end", dargs.t_end, "final time (default 10 T)");
  dde->add_option("--u0", dargs.u0, "initial value");
  dde->add_option("--roots", dargs.roots, "number of characteristic roots to report");
  dde->add_option("--out-dir", dargs.out_dir, "directory for per-N trajectory CSVs");

  SimArgs sargs;
  auto* sim = app.add_subcommand("simulate", "jump-chain ensemble mean as CSV");
  add_loop_options(sim, model, true, false);
  sim->add_option("--u0", sargs.u0, "initial mass in state 0");
  sim->add_option("--p0", sargs.p0, "full initial vector")->delimiter(',');
  sim->add_option("--t-end", sargs.t_end, "final time");
  sim->add_option("--paths", sargs.paths, "number of paths");
  sim->add_option("--seed", sargs.seed, "random seed");
  sim->add_option("--intervals", sargs.intervals, "output grid intervals");
  sim->add_option("--threads", sargs.threads, "worker threads");
  sim->add_option("--errors", sargs.errors, "write standard errors as CSV here");

  auto* integ = app.add_subcommand("integrate", "forward equation p' = A* p by RK4 as CSV");
  add_loop_options(integ, model, true, false);
  integ->add_option("--u0", sargs.u0, "initial mass in state 0");
  integ->add_option("--p0", sargs.p0, "full initial vector")->delimiter(',');
  integ->add_option("--t-end", sargs.t_end, "final time");
  integ->add_option("--intervals", sargs.intervals, "output grid intervals");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, json_errors, "UsageError", e.what());
    const CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    if (!json_errors) err << target->help();
    return 2;
  }

  std::ostringstream buf;
  const CLI::App* active = app.get_subcommands().front();
  int code = 0;
  try {
    if (active == mp2me) code = cmd_mp2me(model, buf);
    else if (active == me2mp) code = cmd_me2mp(model, u0, buf);
    else if (active == solve) code = cmd_solve(model, solve_args, buf);
    else if (active == spec) code = cmd_spectrum(model, cyc, buf);
    else if (active == stat) code = cmd_stationary(model, u0, buf);
    else if (active == check) code = cmd_check(model, buf);
    else if (active == dde) code = cmd_dde(dargs, buf);
    else if (active == sim) code = cmd_simulate(model, sargs, buf);
    else if (active == integ) code = cmd_integrate(model, sargs, buf);
    else if (k_eval->parsed()) code = cmd_kernel_eval(model, kargs, buf);
    else if (k_lap->parsed()) code = cmd_kernel_laplace(model, kargs, buf);
    else if (k_mom->parsed()) code = cmd_kernel_moments(model, kargs, buf);
    else if (k_chk->parsed()) code = cmd_kernel_check(model, kargs, buf);
  } catch (const UsageError& e) {
    report_error(err, json_errors, "UsageError", e.what());
    if (!json_errors) {
      const CLI::App* target = active;
      while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
      err << target->help();
    }
    return 2;
  } catch (const Error& e) {
    report_error(err, json_errors, to_string(e.code()), e.what());
    return e.code() == ErrorCode::ParseError ? 2 : 1;
  } catch (const std::exception& e) {
    report_error(err, json_errors, "InternalError", e.what());
    return 1;
  }

  if (out_path.empty()) {
    out << buf.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      report_error(err, json_errors, "UsageError", "cannot write '" + out_path + "'");
      return 2;
    }
    f << buf.str();
  }
  return code;
}

}  // namespace memchain::cli
