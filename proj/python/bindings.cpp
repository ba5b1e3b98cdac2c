#include "memchain/dde.hpp"
#include "memchain/embed.hpp"
#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"
#include "memchain/me_solver.hpp"
#include "memchain/serialize.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace memchain;

namespace {

// (times, values) with values shaped (steps, width), or (steps,) for width 1.
py::tuple to_arrays(const Trajectory& tr) {
  py::array_t<double> t(static_cast<py::ssize_t>(tr.size()));
  std::copy(tr.times().begin(), tr.times().end(), t.mutable_data());
  if (tr.width() == 1) {
    py::array_t<double> v(static_cast<py::ssize_t>(tr.size()));
    for (std::size_t s = 0; s < tr.size(); ++s) v.mutable_at(static_cast<py::ssize_t>(s)) = tr.at(s, 0);
    return py::make_tuple(t, v);
  }
  py::array_t<double> v({static_cast<py::ssize_t>(tr.size()), static_cast<py::ssize_t>(tr.width())});
  auto w = v.mutable_unchecked<2>();
  for (std::size_t s = 0; s < tr.size(); ++s)
    for (std::size_t c = 0; c < tr.width(); ++c) w(static_cast<py::ssize_t>(s), static_cast<py::ssize_t>(c)) = tr.at(s, c);
  return py::make_tuple(t, v);
}

ExpPolyKernel kernel_from(const std::vector<std::tuple<double, double, int>>& terms) {
  std::vector<KernelTerm> out;
  for (const auto& [c, r, k] : terms) out.push_back({c, r, k});
  return ExpPolyKernel(std::move(out));
}

GeneratorMatrix generator_from(const Eigen::MatrixXd& A) { return GeneratorMatrix(A); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Memory equations and loop-structured Markov chains";

  // Instances carry the error name in `.code`.
  static py::handle error = py::exception<Error>(m, "MemchainError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<LoopGenerator>(m, "LoopGenerator")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("a"), py::arg("b"))
      .def_property_readonly("a", [](const LoopGenerator& g) {
        return std::vector<double>(g.split_rates().begin(), g.split_rates().end());
      })
      .def_property_readonly("b", [](const LoopGenerator& g) {
        return std::vector<double>(g.return_rates().begin(), g.return_rates().end());
      })
      .def_property_readonly("states", &LoopGenerator::states)
      .def_property_readonly("total_split_rate", &LoopGenerator::total_split_rate)
      .def("to_json", [](const LoopGenerator& g) { return serialize(g); })
      .def_static("from_json", [](const std::string& s) { return deserialize_loop(s); })
      .def("__eq__", [](const LoopGenerator& x, const LoopGenerator& y) { return x == y; })
      .def("__repr__", [](const LoopGenerator& g) { return "LoopGenerator(" + serialize(g) + ")"; });

  py::class_<ExpPolyKernel>(m, "Kernel")
      .def(py::init(&kernel_from), py::arg("terms"),
           "Terms (c, alpha, k) for c t^k e^{-alpha t}; equal (alpha, k) terms are merged.")
      .def_property_readonly("terms", [](const ExpPolyKernel& K) {
        std::vector<std::tuple<double, double, int>> out;
        for (const auto& t : K.terms()) out.emplace_back(t.coeff, t.rate, t.power);
        return out;
      })
      .def("__call__", [](const ExpPolyKernel& K, double t) { return kernel_eval(K, t); })
      .def("__call__", [](const ExpPolyKernel& K, py::array_t<double> t) {
        return py::vectorize([&K](double x) { return kernel_eval(K, x); })(std::move(t));
      })
      .def("laplace", [](const ExpPolyKernel& K, cplx x) { return kernel_laplace_at(K, x); })
      .def("moments", [](const ExpPolyKernel& K) {
        const auto mo = moments(K);
        return py::make_tuple(mo.mass, mo.mean_time);
      })
      .def("to_json", [](const ExpPolyKernel& K) { return serialize(K); })
      .def_static("from_json", [](const std::string& s) { return deserialize_kernel(s); })
      .def("__repr__", [](const ExpPolyKernel& K) { return "Kernel(" + serialize(K) + ")"; });

  m.def("build_generator", [](const LoopGenerator& g) { return build_generator(g).entries(); });
  m.def("build_cyclic_generator",
        [](double a, double b, std::size_t n) { return build_cyclic_generator(a, b, n).entries(); });
  m.def("stationary", [](const Eigen::MatrixXd& A, double total) {
    const auto p = stationary(generator_from(A), total);
    return std::vector<double>(p.masses().begin(), p.masses().end());
  }, py::arg("A"), py::arg("total") = 1.0);
  m.def("partition_constant", &partition_constant);
  m.def("spectrum", [](const Eigen::MatrixXd& A) { return spectrum(generator_from(A)); });
  m.def("integrate", [](const Eigen::MatrixXd& A, const std::vector<double>& p0, const std::vector<double>& times) {
    return to_arrays(integrate(generator_from(A), ProbabilityVector(p0), times));
  });
  m.def("simulate", [](const Eigen::MatrixXd& A, const std::vector<double>& p0, double t_end, std::size_t paths,
                       std::uint64_t seed, std::size_t intervals, std::size_t threads) {
    SimulationOptions opt;
    opt.paths = paths;
    opt.seed = seed;
    opt.intervals = intervals;
    opt.threads = threads;
    const auto r = simulate_ctmc(generator_from(A), ProbabilityVector(p0), t_end, opt);
    auto mean = to_arrays(r.mean);
    return py::make_tuple(mean[0], mean[1], to_arrays(r.std_error)[1]);
  }, py::arg("A"), py::arg("p0"), py::arg("t_end"), py::arg("paths") = 10000, py::arg("seed") = 0,
     py::arg("intervals") = 100, py::arg("threads") = 1);

  m.def("mp_to_me", [](const LoopGenerator& g) { return py::make_tuple(g.total_split_rate(), LoopKernel(g).flatten()); },
        "(a, K) of the memory equation seen by state 0.");
  m.def("kernel_components", [](const LoopGenerator& g) {
    const LoopKernel lk(g);
    std::vector<ExpPolyKernel> out;
    for (std::size_t j = 1; j <= g.loops(); ++j) out.push_back(lk.component(j));
    return out;
  });
  m.def("lagrange_psi", [](const std::vector<double>& b, std::size_t j) { return lagrange_psi(b, j); });
  m.def("positivity_check", [](const ExpPolyKernel& K, double horizon) {
    const auto r = positivity_check(K, horizon);
    py::dict d;
    d["positive"] = r.positive;
    d["min_value"] = r.min_value;
    d["argmin"] = r.argmin;
    d["horizon"] = r.horizon;
    d["tail_certified"] = r.tail_certified;
    return d;
  }, py::arg("K"), py::arg("horizon") = 0.0);
  m.def("weighted_minimum", [](const ExpPolyKernel& K, double shift, double horizon) {
    const auto w = weighted_minimum(K, shift, horizon);
    return py::make_tuple(w.value, w.argmin);
  });

  m.def("decompose_to_loop", [](const ExpPolyKernel& K) -> std::optional<LoopGenerator> {
    return decompose_to_loop(K).loop;
  }, "A loop with nonnegative split rates reproducing K, or None.");
  m.def("from_mean_times", [](const std::vector<double>& t, const std::vector<double>& a) {
    return from_mean_times(t, a);
  });
  m.def("me_to_mp", [](double a, const ExpPolyKernel& K, double u0) {
    const auto e = me_to_mp(a, K, u0);
    return py::make_tuple(e.loop, e.generator.entries());
  }, py::arg("a"), py::arg("K"), py::arg("u0") = 1.0);

  m.def("solve_me", [](double a, const ExpPolyKernel& K, double u0, double t_end, double h) {
    return to_arrays(solve_me(a, K, u0, UniformGrid::covering(t_end, h)));
  }, py::arg("a"), py::arg("K"), py::arg("u0"), py::arg("t_end"), py::arg("h") = 1e-3);
  m.def("solve_me_via_mp", [](double a, const ExpPolyKernel& K, double u0, double t_end, double h) {
    return to_arrays(solve_me_via_mp(a, K, u0, UniformGrid::covering(t_end, h)));
  }, py::arg("a"), py::arg("K"), py::arg("u0"), py::arg("t_end"), py::arg("h") = 1e-3);
  m.def("closed_form", [](const LoopGenerator& g, double u0) {
    std::vector<std::pair<cplx, cplx>> out;
    for (const auto& md : closed_form(g, u0)) out.emplace_back(md.residue, md.pole);
    return out;
  }, "List of (residue, pole).");
  m.def("equilibrium", &equilibrium_me, py::arg("gen"), py::arg("u0") = 1.0);

  m.def("erlang_kernel", &erlang_kernel, py::arg("N"), py::arg("T"));
  m.def("solve_dde", [](double a, double T, double u0, double t_end, double h) {
    return to_arrays(solve_dde(a, T, u0, t_end, h));
  }, py::arg("a"), py::arg("T"), py::arg("u0"), py::arg("t_end"), py::arg("h") = 1e-3);
  m.def("chain_approximation", [](double a, double T, std::size_t N, double u0, const std::vector<double>& times) {
    return to_arrays(chain_approximation(a, T, N, u0, times))[1];
  });
  m.def("dde_char_roots", &dde_char_roots, py::arg("a"), py::arg("T"), py::arg("count"));
  m.def("cyclic_spectrum", &cyclic_spectrum, py::arg("a"), py::arg("T"), py::arg("N"));
}
