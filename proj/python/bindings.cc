#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mapfree/cli/commands.h"
#include "mapfree/error.h"
#include "mapfree/eval/metrics.h"
#include "mapfree/io/formats.h"
#include "mapfree/io/synthetic.h"
#include "mapfree/pipelines/estimators.h"
#include "mapfree/robust/scale_consensus.h"

namespace py = pybind11;
using namespace mapfree;

namespace {

using DepthArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using MatchArray =
    py::array_t<double, py::array::c_style | py::array::forcecast>;

DepthMap DepthFromArray(const DepthArray& a) {
  if (a.ndim() != 2) throw InvalidParameterError("depth must be a 2-D array");
  DepthMap d(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), d.values.begin());
  return d;
}

DepthArray DepthToArray(const DepthMap& d) {
  DepthArray a({d.height, d.width});
  std::copy(d.values.begin(), d.values.end(), a.mutable_data());
  return a;
}

// Rows of (u_ref, v_ref, u_query, v_query[, score]).
CorrespondenceSet MatchesFromArray(const MatchArray& a) {
  if (a.ndim() != 2 || (a.shape(1) != 4 && a.shape(1) != 5)) {
    throw InvalidParameterError("matches must have shape (n, 4) or (n, 5)");
  }
  const auto m = a.unchecked<2>();
  CorrespondenceSet out;
  for (py::ssize_t i = 0; i < m.shape(0); ++i) {
    out.push_back({{m(i, 0), m(i, 1)},
                   {m(i, 2), m(i, 3)},
                   m.shape(1) == 5 ? m(i, 4) : 1.0});
  }
  return out;
}

py::array_t<double> MatchesToArray(const CorrespondenceSet& c) {
  py::array_t<double> a({static_cast<py::ssize_t>(c.size()),
                         static_cast<py::ssize_t>(5)});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i) {
    m(i, 0) = c[i].ref_px.x();
    m(i, 1) = c[i].ref_px.y();
    m(i, 2) = c[i].query_px.x();
    m(i, 3) = c[i].query_px.y();
    m(i, 4) = c[i].score;
  }
  return a;
}

}  // namespace

PYBIND11_MODULE(_mapfree, m) {
  m.doc() = "Metric relative pose from one reference image, and its metrics.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameterError>(m, "InvalidParameterError",
                                                error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<NoConsensusError>(m, "NoConsensusError", error.ptr());
  py::register_exception<ScaleFailureError>(m, "ScaleFailureError",
                                            error.ptr());

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
             return Pose{Rotation(r), t};
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_property_readonly(
          "rotation", [](const Pose& p) { return p.rotation.matrix(); })
      .def_readwrite("translation", &Pose::translation)
      .def("apply", &Pose::Apply)
      .def("inverse", [](const Pose& p) { return Inverse(p); })
      .def("camera_center", [](const Pose& p) { return CameraCenter(p); })
      .def("__matmul__", [](const Pose& a, const Pose& b) { return Compose(a, b); })
      .def("__repr__", [](const Pose& p) {
        return "Pose(t=[" + std::to_string(p.translation.x()) + ", " +
               std::to_string(p.translation.y()) + ", " +
               std::to_string(p.translation.z()) + "])";
      });

  m.def("pose_from_quaternion",
        [](double w, double x, double y, double z, const Eigen::Vector3d& t) {
          return Pose{RotationFromQuaternion({w, x, y, z}), t};
        },
        py::arg("w"), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("t"));
  m.def("rotation_error_deg", [](const Pose& a, const Pose& b) {
    return RotationErrorDeg(a.rotation, b.rotation);
  });
  m.def("translation_error_m", &TranslationErrorM);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width,
                       int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.Validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height)
      .def("diagonal", &CameraIntrinsics::Diagonal)
      .def("project", [](const CameraIntrinsics& k, const Eigen::Vector3d& x) {
        return Project(k, x);
      })
      .def("backproject",
           [](const CameraIntrinsics& k, const Eigen::Vector2d& px, double d) {
             return Backproject(k, px, d);
           });

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &EstimatorConfig::max_iterations)
      .def_readwrite("confidence", &EstimatorConfig::confidence)
      .def_readwrite("min_inliers", &EstimatorConfig::min_inliers)
      .def_readwrite("rng_seed", &EstimatorConfig::rng_seed)
      .def_readwrite("inlier_threshold", &EstimatorConfig::inlier_threshold)
      .def_readwrite("min_scale_inliers", &EstimatorConfig::min_scale_inliers)
      .def_property(
          "scale_tolerance",
          [](const EstimatorConfig& c) { return c.scale.relative_tolerance; },
          [](EstimatorConfig& c, double v) { c.scale.relative_tolerance = v; });

  py::class_<PoseEstimate>(m, "PoseEstimate")
      .def_property_readonly(
          "status",
          [](const PoseEstimate& e) { return std::string(ToString(e.status)); })
      .def_readonly("pose", &PoseEstimate::pose)
      .def_readonly("confidence", &PoseEstimate::confidence)
      .def_property_readonly("inlier_mask", [](const PoseEstimate& e) {
        return std::vector<bool>(e.inlier_mask.begin(), e.inlier_mask.end());
      });

  m.def(
      "estimate",
      [](const std::string& estimator, const MatchArray& matches,
         const DepthArray& depth_ref, const DepthArray& depth_query,
         const CameraIntrinsics& k_ref, const CameraIntrinsics& k_query,
         const EstimatorConfig& config) {
        const CorrespondenceSet c = MatchesFromArray(matches);
        const DepthMap dr = DepthFromArray(depth_ref);
        const DepthMap dq = DepthFromArray(depth_query);
        py::gil_scoped_release release;
        return Estimate(ParseEstimatorKind(estimator), c, dr, dq, k_ref,
                        k_query, config);
      },
      py::arg("estimator"), py::arg("matches"), py::arg("depth_ref"),
      py::arg("depth_query"), py::arg("k_ref"), py::arg("k_query"),
      py::arg("config") = EstimatorConfig{},
      "Estimator is 'essmat-dscale', 'pnp' or 'procrustes'.");

  m.def(
      "scale_consensus",
      [](const std::vector<double>& estimates, double relative_tolerance,
         double min_component) {
        const ScaleConsensus s = ConsensusFromEstimates(
            estimates, {relative_tolerance, min_component});
        return py::make_tuple(s.scale, s.support);
      },
      py::arg("estimates"), py::arg("relative_tolerance") = 0.1,
      py::arg("min_component") = 1e-4,
      "Returns (scale, support); raises ScaleFailureError without support.");

  py::class_<VirtualGrid>(m, "VirtualGrid")
      .def(py::init<>())
      .def_readwrite("height", &VirtualGrid::height)
      .def_readwrite("width", &VirtualGrid::width)
      .def_readwrite("depth", &VirtualGrid::depth)
      .def_readwrite("spacing", &VirtualGrid::spacing)
      .def_readwrite("offset", &VirtualGrid::offset);
  m.def(
      "build_virtual_grid",
      [](const VirtualGrid& g) {
        const std::vector<Eigen::Vector3d> pts = BuildVirtualGrid(g);
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> out(
            pts.size(), 3);
        for (std::size_t i = 0; i < pts.size(); ++i) out.row(i) = pts[i];
        return out;
      },
      py::arg("grid") = VirtualGrid{});
  m.def("vcre", &Vcre, py::arg("estimate"), py::arg("ground_truth"),
        py::arg("k_query"), py::arg("grid") = VirtualGrid{});

  py::class_<SyntheticQuery>(m, "SyntheticQuery")
      .def_readonly("query_id", &SyntheticQuery::query_id)
      .def_readonly("pose", &SyntheticQuery::pose)
      .def_readonly("k", &SyntheticQuery::k)
      .def_property_readonly(
          "depth", [](const SyntheticQuery& q) { return DepthToArray(q.depth); })
      .def_property_readonly("matches", [](const SyntheticQuery& q) {
        return MatchesToArray(q.matches);
      })
      .def_property_readonly("is_outlier", [](const SyntheticQuery& q) {
        return std::vector<bool>(q.is_outlier.begin(), q.is_outlier.end());
      });
  py::class_<SyntheticScene>(m, "SyntheticScene")
      .def_readonly("scene_id", &SyntheticScene::scene_id)
      .def_readonly("k_ref", &SyntheticScene::k_ref)
      .def_property_readonly(
          "depth_ref",
          [](const SyntheticScene& s) { return DepthToArray(s.depth_ref); })
      .def_readonly("queries", &SyntheticScene::queries);
  m.def(
      "synthetic_scene",
      [](const std::map<std::string, std::string>& config,
         const std::string& scene_id, std::uint64_t seed) {
        return GenerateSyntheticScene(SyntheticSceneConfig::FromKeyValues(config),
                                      scene_id, seed);
      },
      py::arg("config") = std::map<std::string, std::string>{},
      py::arg("scene_id") = "scene_000", py::arg("seed") = 1,
      "Config keys are those of a synth config file; values are strings.");
  m.def("write_scene", &WriteScene, py::arg("root"), py::arg("scene"));

  m.def("read_depth_map", [](const std::filesystem::path& p) {
    return DepthToArray(ReadDepthMap(p));
  });
  m.def("write_depth_map",
        [](const std::filesystem::path& p, const DepthArray& a) {
          WriteDepthMap(p, DepthFromArray(a));
        });
  m.def("read_correspondences", [](const std::filesystem::path& p) {
    return MatchesToArray(ReadCorrespondences(p));
  });

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "mapfree");
        std::vector<const char*> argv;
        for (const std::string& a : args) argv.push_back(a.c_str());
        py::gil_scoped_release release;
        return RunCli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool; returns its exit code.");
}
