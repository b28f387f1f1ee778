#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "treerange/analytics.hpp"
#include "treerange/brw.hpp"
#include "treerange/errors.hpp"
#include "treerange/harness.hpp"
#include "treerange/snake.hpp"
#include "treerange/spine.hpp"
#include "treerange/trees.hpp"

namespace py = pybind11;

using namespace treerange;
using distributions::JumpDistribution;
using distributions::OffspringDistribution;

namespace {

Point to_point(const std::vector<std::int32_t>& coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw DomainError("dimension out of range");
  Point p = Point::zero(static_cast<int>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) p.c[i] = coords[i];
  return p;
}

std::vector<std::int32_t> from_point(const Point& p) {
  return std::vector<std::int32_t>(p.c.begin(), p.c.begin() + p.dim);
}

py::dict record_dict(const stats::EstimateRecord& rec) {
  py::dict d;
  d["value"] = rec.value;
  d["stderr"] = rec.stderr_;
  d["reps"] = rec.reps;
  d["seed"] = rec.seed;
  return d;
}

JumpDistribution jump_from_table(
    int dim, const std::vector<std::pair<std::vector<std::int32_t>, double>>& sup) {
  std::vector<std::pair<Point, double>> entries;
  for (const auto& [coords, p] : sup) entries.emplace_back(to_point(coords), p);
  return JumpDistribution::from_table(dim, entries);
}

}  // namespace

PYBIND11_MODULE(_treerange, m) {
  m.doc() = "Range of tree-indexed random walks: samplers, exact lattice "
            "computations and the limit-law estimators.";

  py::register_exception<Error>(m, "TreerangeError");

  py::class_<OffspringDistribution>(m, "OffspringDistribution")
      .def_static("geometric_critical", &OffspringDistribution::geometric_critical)
      .def_static("from_table", &OffspringDistribution::from_table,
                  py::arg("entries"), py::arg("name") = "table")
      .def("pmf", &OffspringDistribution::pmf)
      .def("tail", &OffspringDistribution::tail)
      .def("gen_fn", &OffspringDistribution::gen_fn)
      .def_property_readonly("mean", &OffspringDistribution::mean)
      .def_property_readonly("variance", &OffspringDistribution::variance)
      .def("sample",
           [](const OffspringDistribution& mu, std::uint64_t seed,
              std::uint64_t replica, std::int64_t count) {
             RngStream rng(seed, replica, 81);
             std::vector<std::int64_t> out(count);
             for (auto& v : out) v = mu.sample(rng);
             return out;
           },
           py::arg("seed"), py::arg("replica") = 0, py::arg("count") = 1);

  py::class_<JumpDistribution>(m, "JumpDistribution")
      .def_static("srw", &JumpDistribution::srw, py::arg("dim"))
      .def_static("from_table", &jump_from_table, py::arg("dim"),
                  py::arg("support"))
      .def_property_readonly("dim", &JumpDistribution::dim)
      .def_property_readonly("sigma2", &JumpDistribution::sigma2)
      .def_property_readonly("period", &JumpDistribution::period)
      .def_property_readonly("symmetric", &JumpDistribution::symmetric)
      .def_property_readonly("centered", &JumpDistribution::centered)
      .def_property_readonly("covariance", &JumpDistribution::covariance)
      .def("sample",
           [](const JumpDistribution& theta, std::uint64_t seed,
              std::uint64_t replica, std::int64_t count) {
             RngStream rng(seed, replica, 82);
             std::vector<std::vector<std::int32_t>> out;
             for (std::int64_t i = 0; i < count; ++i)
               out.push_back(from_point(theta.sample(rng)));
             return out;
           },
           py::arg("seed"), py::arg("replica") = 0, py::arg("count") = 1);

  m.def("adaptedness_diagonal",
        [](int dim, const std::vector<std::vector<std::int32_t>>& vectors) {
          std::vector<Point> pts;
          for (const auto& v : vectors) pts.push_back(to_point(v));
          auto cert = distributions::adaptedness_certificate(dim, pts);
          return py::make_tuple(cert.adapted, cert.diagonal);
        },
        "Hermite-form diagonal of the lattice generated by the vectors");

  // Trees.
  m.def("sample_gw",
        [](const OffspringDistribution& mu, std::uint64_t seed,
           std::uint64_t replica, std::int64_t cap) {
          RngStream rng(seed, replica, 83);
          return trees::sample_gw(mu, rng, cap).preorder_children;
        },
        py::arg("mu"), py::arg("seed"), py::arg("replica") = 0,
        py::arg("cap") = 1000000000);
  m.def("sample_gw_conditioned_size",
        [](const OffspringDistribution& mu, std::int64_t n, std::uint64_t seed,
           std::uint64_t replica) {
          RngStream rng(seed, replica, 84);
          return trees::sample_gw_conditioned_size(mu, n, rng).preorder_children;
        });
  m.def("sample_uniform_plane_tree",
        [](std::int64_t n, std::uint64_t seed, std::uint64_t replica) {
          RngStream rng(seed, replica, 85);
          return trees::sample_uniform_plane_tree(n, rng).preorder_children;
        });
  m.def("lukasiewicz", [](const std::vector<std::int32_t>& children) {
    trees::PlaneTree t{children};
    return trees::lukasiewicz(t);
  });
  m.def("tree_from_lukasiewicz", [](const std::vector<std::int32_t>& inc) {
    return trees::tree_from_lukasiewicz(inc).preorder_children;
  });
  m.def("spatial_tree_range",
        [](const std::vector<std::int32_t>& children,
           const JumpDistribution& theta, std::uint64_t seed,
           std::uint64_t replica) {
          trees::PlaneTree t{children};
          RngStream rng(seed, replica, 86);
          return trees::range_of(trees::assign_locations(t, theta, rng));
        });

  // Spine estimators.
  m.def("estimate_infinite_range",
        [](const OffspringDistribution& mu, const JumpDistribution& theta,
           std::int64_t n, std::int64_t reps, std::uint64_t seed, int workers) {
          return record_dict(
              spine::estimate_infinite_range(mu, theta, n, reps, seed, workers));
        },
        py::arg("mu"), py::arg("theta"), py::arg("n"), py::arg("reps"),
        py::arg("seed"), py::arg("workers") = 1);
  m.def("estimate_no_return",
        [](const OffspringDistribution& mu, const JumpDistribution& theta,
           std::int64_t horizon, std::int64_t reps, std::uint64_t seed,
           int workers) {
          return record_dict(spine::estimate_no_return(mu, theta, horizon, reps,
                                                       seed, workers));
        },
        py::arg("mu"), py::arg("theta"), py::arg("horizon"), py::arg("reps"),
        py::arg("seed"), py::arg("workers") = 1);
  m.def("conditioned_range",
        [](const OffspringDistribution& mu, const JumpDistribution& theta,
           std::int64_t n, std::int64_t reps, std::uint64_t seed, int workers) {
          return record_dict(
              spine::conditioned_range(mu, theta, n, reps, seed, workers));
        },
        py::arg("mu"), py::arg("theta"), py::arg("n"), py::arg("reps"),
        py::arg("seed"), py::arg("workers") = 1);
  m.def("estimate_a",
        [](const OffspringDistribution& mu, const JumpDistribution& theta,
           std::int64_t reps, std::uint64_t seed) {
          auto res = spine::estimate_a(mu, theta, reps, seed);
          py::dict d = record_dict(res.record);
          d["truncated"] = res.truncated;
          return d;
        });
  m.def("estimate_h",
        [](const OffspringDistribution& mu, const JumpDistribution& theta,
           const std::vector<std::int32_t>& y, std::int64_t reps,
           std::uint64_t seed) {
          auto res = spine::estimate_h(mu, theta, to_point(y), reps, seed);
          py::dict d = record_dict(res.record);
          d["truncated"] = res.truncated;
          return d;
        });

  // Snake.
  m.def("pitman_pmf", &snake::pitman_pmf, py::arg("k"), py::arg("m"));
  m.def("head_return_exact",
        [](const JumpDistribution& theta, std::int64_t k) {
          return snake::head_return_exact(theta, k);
        });
  m.def("free_snake_range",
        [](const JumpDistribution& theta, std::int64_t n, std::int64_t reps,
           std::uint64_t seed, int workers) {
          auto res = snake::free_range(theta, n, reps, seed, workers);
          py::dict d = record_dict(res.record);
          d["second_moment"] = res.second_moment;
          d["variance"] = res.variance;
          return d;
        },
        py::arg("theta"), py::arg("n"), py::arg("reps"), py::arg("seed"),
        py::arg("workers") = 1);
  m.def("excursion_range",
        [](std::int64_t n, const JumpDistribution& theta, std::uint64_t seed,
           std::uint64_t replica) {
          RngStream rng(seed, replica, 87);
          return snake::sample_excursion_range(n, theta, rng);
        });
  m.def("no_return_head",
        [](const JumpDistribution& theta, std::int64_t n, std::int64_t reps,
           std::uint64_t seed, int workers) {
          auto res =
              snake::estimate_no_return_head(theta, n, reps, seed, {}, workers);
          py::dict d = record_dict(res.record);
          d["log_scaled"] = res.log_scaled;
          return d;
        },
        py::arg("theta"), py::arg("n"), py::arg("reps"), py::arg("seed"),
        py::arg("workers") = 1);

  // Analytics.
  m.def("green",
        [](const JumpDistribution& theta, const std::vector<std::int32_t>& x,
           double eps) {
          auto g = analytics::green(theta, to_point(x), eps);
          return py::make_tuple(g.value, g.error_bound);
        },
        py::arg("theta"), py::arg("x"), py::arg("eps") = 1e-6);
  m.def("kemperman_check", [](std::int64_t m, std::int64_t k) {
    auto r = analytics::kemperman_check(m, k);
    return py::make_tuple(r.lhs, r.rhs, r.exact_equal);
  });
  m.def("llt_compare", [](std::int64_t k, std::int64_t m) {
    auto r = analytics::llt_compare(k, m);
    return py::make_tuple(r.exact, r.gaussian, r.relative_error);
  });
  m.def("srw_return_pmf", &analytics::srw_return_pmf, py::arg("dim"),
        py::arg("kmax"));

  // Branching random walk.
  m.def("j_cdf", &brw::j_cdf, py::arg("s"));
  m.def("brw_run",
        [](std::int64_t p, const OffspringDistribution& mu,
           const JumpDistribution& theta, std::uint64_t seed,
           std::uint64_t replica, std::int64_t cap) {
          RngStream rng(seed, replica, 41);
          auto r = brw::brw_run(p, mu, theta, rng, cap);
          py::dict d;
          d["range"] = r.range;
          d["progeny"] = r.progeny;
          d["generations"] = r.generations;
          d["truncated"] = r.truncated;
          return d;
        },
        py::arg("p"), py::arg("mu"), py::arg("theta"), py::arg("seed"),
        py::arg("replica") = 0, py::arg("cap") = 100000000);

  // Harness.
  m.def("run_config", [](const std::string& json_text) {
    auto cfg = harness::parse_config(json_text);
    harness::apply_env_seed(cfg);
    std::ostringstream csv, err;
    int code = harness::run(cfg, csv, err);
    return py::make_tuple(code, csv.str(), err.str());
  });
}
