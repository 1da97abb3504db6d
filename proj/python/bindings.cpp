// Copyright 2026 The Lathe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python module lathe._lathe. Rasters cross as float64 NumPy arrays:
// (H, W) for scalar maps, (H, W, 3) for colours and vectors. Configuration
// crosses as JSON text in the format of the CLI's --config file.

#include <optional>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lathe/derender.hpp"
#include "lathe/io.hpp"
#include "lathe/metrics.hpp"
#include "lathe/raster.hpp"
#include "lathe/shading.hpp"
#include "lathe/synth.hpp"

namespace py = pybind11;
using namespace lathe;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const ScalarMap& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.begin(), m.end(), a.mutable_data());
  return a;
}

Array to_numpy(const Grid<Vec3>& m) {
  Array a({m.rows(), m.cols(), 3});
  double* d = a.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int c = 0; c < 3; ++c) d[3 * i + c] = m[i][c];
  return a;
}

Array to_numpy(const Mask& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.begin(), m.end(), a.mutable_data());
  return a;
}

ScalarMap scalar_map(const Array& a, const char* name) {
  if (a.ndim() != 2) throw std::invalid_argument(std::string(name) + ": expected a 2-D array");
  ScalarMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + m.size(), m.begin());
  return m;
}

Grid<Vec3> color_map(const Array& a, const char* name) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument(std::string(name) + ": expected (H, W, 3)");
  Grid<Vec3> m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  const double* d = a.data();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = Vec3(d[3 * i], d[3 * i + 1], d[3 * i + 2]);
  return m;
}

Mask mask_from(const std::optional<Array>& a, const char* name) {
  if (!a) return {};
  const ScalarMap s = scalar_map(*a, name);
  Mask m(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.size(); ++i) m[i] = s[i] != 0.0 ? 1 : 0;
  return m;
}

RunConfig run_config(const std::optional<std::string>& text) {
  if (!text) return {};
  return run_config_from_json(nlohmann::json::parse(*text));
}

py::dict gt_dict(const GeneratedScene& g) {
  py::dict d;
  d["seed"] = g.scene.seed;
  d["profile"] = g.scene.profile;
  d["pose"] = g.scene.pose;
  d["shininess"] = g.scene.material.shininess;
  d["specular_albedo"] = g.scene.material.specular_albedo;
  d["image"] = to_numpy(g.truth.image);
  d["silhouette"] = to_numpy(g.truth.silhouette);
  d["albedo"] = to_numpy(g.truth.albedo);
  d["diffuse"] = to_numpy(g.truth.diffuse);
  d["specular"] = to_numpy(g.truth.specular);
  d["normals"] = to_numpy(g.truth.normals);
  d["env"] = to_numpy(g.scene.env);
  d["env_radiance"] = to_numpy(g.truth.env_radiance);
  return d;
}

}  // namespace

PYBIND11_MODULE(_lathe, m) {
  m.doc() = "Inverse rendering of solids of revolution";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<OptimizerAbort>(m, "OptimizerAbort", PyExc_RuntimeError);

  py::class_<Camera>(m, "Camera")
      .def(py::init([](double fov, int width, int height) {
             Camera c;
             c.fov_deg = fov;
             c.width = width;
             c.height = height;
             return c;
           }),
           py::arg("fov_deg") = 10.0, py::arg("width") = 256, py::arg("height") = 256)
      .def_readwrite("fov_deg", &Camera::fov_deg)
      .def_readwrite("width", &Camera::width)
      .def_readwrite("height", &Camera::height)
      .def("project", [](const Camera& c, std::array<double, 3> p) {
        const Vec3 v = c.project(Vec3(p[0], p[1], p[2]));
        return std::array<double, 3>{v.x(), v.y(), v.z()};
      });

  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init([](double pitch, double roll, double tx, double ty) { return CameraPose{pitch, roll, tx, ty}; }),
           py::arg("pitch") = 0.0, py::arg("roll") = 0.0, py::arg("tx") = 0.0, py::arg("ty") = 0.0)
      .def_readwrite("pitch", &CameraPose::pitch)
      .def_readwrite("roll", &CameraPose::roll)
      .def_readwrite("tx", &CameraPose::tx)
      .def_readwrite("ty", &CameraPose::ty)
      .def("__repr__", [](const CameraPose& p) {
        return "CameraPose(pitch=" + std::to_string(p.pitch) + ", roll=" + std::to_string(p.roll) +
               ", tx=" + std::to_string(p.tx) + ", ty=" + std::to_string(p.ty) + ")";
      });

  py::class_<RadiusProfile>(m, "RadiusProfile")
      .def(py::init([](std::vector<double> radii, double height) { return RadiusProfile{std::move(radii), height}; }),
           py::arg("radii"), py::arg("height"))
      .def_readwrite("radii", &RadiusProfile::radii)
      .def_readwrite("height", &RadiusProfile::height);

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int size, int tex, bool diffuse_only) {
        SynthConfig c;
        c.camera.width = c.camera.height = size;
        c.tex_rows = c.tex_cols = tex;
        c.diffuse_only = diffuse_only;
        return gt_dict(generate_scene(seed, c));
      },
      py::arg("seed"), py::arg("size") = 256, py::arg("tex") = 256, py::arg("diffuse_only") = false,
      "Synthetic scene parameters and ground-truth maps for one seed.");

  m.def(
      "rasterize_silhouette",
      [](const RadiusProfile& profile, const CameraPose& pose, const Camera& camera, int columns) {
        return to_numpy(rasterize_silhouette(revolve(profile, columns), pose, camera));
      },
      py::arg("profile"), py::arg("pose"), py::arg("camera"), py::arg("columns") = 96);

  m.def(
      "distance_transform", [](const Array& mask) { return to_numpy(distance_transform(mask_from(mask, "mask")).distance); },
      py::arg("mask"), "Euclidean distance to the nearest non-zero pixel.");

  m.def("tonemap", &tonemap, py::arg("x"));

  m.def(
      "si_mse",
      [](const Array& pred, const Array& target, const std::optional<Array>& mask) {
        const Mask mk = mask_from(mask, "mask");
        const Mask* mp = mask ? &mk : nullptr;
        if (pred.ndim() == 3) return si_mse(color_map(pred, "pred"), color_map(target, "target"), mp).value;
        return si_mse(scalar_map(pred, "pred"), scalar_map(target, "target"), mp).value;
      },
      py::arg("pred"), py::arg("target"), py::arg("mask") = py::none());

  m.def(
      "normal_angular_error",
      [](const Array& pred, const Array& truth, const std::optional<Array>& mask) {
        const Mask mk = mask_from(mask, "mask");
        return normal_angular_error(color_map(pred, "pred"), color_map(truth, "truth"), mask ? &mk : nullptr).degrees;
      },
      py::arg("pred"), py::arg("truth"), py::arg("mask") = py::none());

  m.def(
      "silhouette_iou", [](const Array& a, const Array& b) { return silhouette_iou(scalar_map(a, "a"), scalar_map(b, "b")); },
      py::arg("a"), py::arg("b"));

  m.def(
      "derender",
      [](const Array& image, const Array& silhouette, const std::optional<std::string>& config, double fov) {
        const RunConfig rc = run_config(config);
        const ColorMap img = color_map(image, "image");
        const ScalarMap sil = scalar_map(silhouette, "silhouette");
        if (!img.same_shape(sil)) throw std::invalid_argument("image and silhouette sizes differ");
        Camera camera;
        camera.fov_deg = fov;
        camera.width = img.cols();
        camera.height = img.rows();
        DerenderResult r;
        {
          py::gil_scoped_release release;
          r = derender(img, sil, camera, rc.optimizer, rc.weights);
        }
        py::dict d;
        d["profile"] = r.decomposition.profile;
        d["pose"] = r.decomposition.pose;
        d["shininess"] = r.decomposition.material.shininess;
        d["specular_albedo"] = r.decomposition.material.specular_albedo;
        d["albedo"] = to_numpy(r.decomposition.material.albedo);
        d["env"] = to_numpy(r.decomposition.env);
        d["normals"] = to_numpy(r.appearance.problem.normals);
        d["valid"] = to_numpy(r.appearance.problem.valid);
        d["reconstruction"] = to_numpy(r.reconstruction);
        d["shape_loss"] = r.shape.loss;
        d["appearance_loss"] = r.appearance.loss;
        d["image_loss"] = r.image_loss;
        return d;
      },
      py::arg("image"), py::arg("silhouette"), py::arg("config") = py::none(), py::arg("fov_deg") = 10.0,
      "Runs shape then appearance fitting. `config` is JSON text in the --config format.");

  m.def("default_config", [] { return to_json(RunConfig{}).dump(); }, "Default configuration as JSON text.");

  m.def("read_pfm", [](const std::string& path) -> py::object {
    try {
      return to_numpy(read_pfm_color(path));
    } catch (const FormatError&) {
      return to_numpy(read_pfm_scalar(path));
    }
  });
  m.def("write_pfm", [](const std::string& path, const Array& a) {
    if (a.ndim() == 3)
      write_pfm(path, color_map(a, "array"));
    else
      write_pfm(path, scalar_map(a, "array"));
  });
  m.def("read_png", [](const std::string& path) { return to_numpy(read_png_color(path)); });
  m.def("write_png", [](const std::string& path, const Array& a) {
    if (a.ndim() == 3)
      write_png(path, color_map(a, "array"));
    else
      write_png(path, scalar_map(a, "array"));
  });
}
