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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "lathe/derender.hpp"
#include "lathe/io.hpp"
#include "lathe/metrics.hpp"
#include "lathe/synth.hpp"

namespace lathe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Runs fn(0) .. fn(n - 1) on up to `jobs` threads. fn must not throw.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

int exit_code(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const OptimizerAbort&) {
    return kOptimizerAbort;
  } catch (const NonFiniteLoss&) {
    return kOptimizerAbort;
  } catch (const IoError&) {
    return kIoFailure;
  } catch (const fs::filesystem_error&) {
    return kIoFailure;
  } catch (const std::invalid_argument&) {  // includes FormatError
    return kBadInput;
  } catch (const std::out_of_range&) {
    return kBadInput;
  } catch (...) {
    return 1;
  }
}

std::string what(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  } catch (...) {
    return "unknown error";
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Records the first failure across worker threads.
struct Failures {
  std::mutex m;
  int code = kOk;
  void report(std::ostream& err, const std::string& where, const std::exception_ptr& e) {
    const std::lock_guard lock(m);
    err << "error: " << where << ": " << what(e) << '\n';
    if (code == kOk) code = exit_code(e);
  }
};

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  int count = 1;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  int size = 256;
  int tex = 256;
  bool diffuse_only = false;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  SynthConfig config;
  config.camera.width = config.camera.height = o.size;
  config.tex_rows = config.tex_cols = o.tex;
  config.diffuse_only = o.diffuse_only;

  const fs::path root(o.out);
  const bool existed = fs::exists(root);
  fs::create_directories(root);

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < o.count; ++i) seeds.push_back(o.seed + static_cast<std::uint64_t>(i));
  std::vector<char> created(seeds.size(), 0);
  Failures failures;
  parallel_for(o.count, o.jobs, [&](int i) {
    const fs::path dir = root / std::to_string(seeds[i]);
    try {
      created[i] = fs::create_directories(dir) ? 1 : 0;
      save_scene(dir, generate_scene(seeds[i], config), config);
    } catch (...) {
      failures.report(err, dir.string(), std::current_exception());
    }
  });

  if (failures.code == kOk) {
    try {
      write_json(root / "manifest.json", {{"version", 1},
                                          {"generator_version", kGeneratorVersion},
                                          {"count", o.count},
                                          {"seeds", seeds},
                                          {"config", to_json(config)}});
    } catch (...) {
      failures.report(err, "manifest", std::current_exception());
    }
  }
  if (failures.code != kOk) {
    std::error_code ec;
    if (!existed) {
      fs::remove_all(root, ec);
    } else {
      for (std::size_t i = 0; i < seeds.size(); ++i)
        if (created[i]) fs::remove_all(root / std::to_string(seeds[i]), ec);
      fs::remove(root / "manifest.json", ec);
    }
    return failures.code;
  }
  out << "wrote " << o.count << " scene(s) to " << root.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- render

struct RenderOptions {
  std::string scene, decomp, out, env;
  std::optional<double> pitch, roll;
};

Camera camera_from_json(const json& j) {
  SynthConfig c = synth_config_from_json(json{{"camera", j}});
  return c.camera;
}

json camera_to_json(const Camera& c) {
  return {{"fov_deg", c.fov_deg}, {"width", c.width}, {"height", c.height}};
}

int cmd_render(const RenderOptions& o, std::ostream& out) {
  std::optional<EnvironmentMap> env;
  if (!o.env.empty()) env = read_pfm_scalar(o.env);
  auto override_pose = [&](CameraPose p) {
    if (o.pitch) p.pitch = *o.pitch;
    if (o.roll) p.roll = *o.roll;
    return p;
  };

  ColorMap image;
  if (!o.scene.empty()) {
    LoadedScene s = load_scene(o.scene);
    if (env) {
      if (env->rows() != s.config.env_rows || env->cols() != s.config.env_cols)
        throw FormatError("--env: expected " + std::to_string(s.config.env_rows) + "x" +
                          std::to_string(s.config.env_cols) + " map");
      s.scene.env = *env;
    }
    s.scene.pose = override_pose(s.scene.pose);
    image = render_scene(s.scene, s.config).image;
  } else {
    const fs::path path(o.decomp);
    const json j = read_json(path);
    if (!j.is_object() || !j.contains("camera") || !j.contains("optimizer") || !j.contains("profile") ||
        !j.contains("pose") || !j.contains("shininess") || !j.contains("specular_albedo"))
      throw FormatError(path.string() + ": not a decomposition file");
    Decomposition d;
    const Camera camera = camera_from_json(j.at("camera"));
    const OptimizerConfig oc = optimizer_config_from_json(j.at("optimizer"));
    d.profile = profile_from_json(j.at("profile"));
    d.pose = pose_from_json(j.at("pose"));
    d.material.shininess = j.at("shininess").get<double>();
    d.material.specular_albedo = j.at("specular_albedo").get<double>();
    d.material.albedo = read_pfm_color(path.parent_path() / SceneFiles::kAlbedo);
    d.env = read_pfm_scalar(path.parent_path() / SceneFiles::kEnv);
    if (env && !env->same_shape(d.env)) throw FormatError("--env: size differs from the decomposition's map");
    image = relight(d, camera, oc.grid_columns, env, override_pose(d.pose));
  }
  write_png(o.out, image);
  out << "wrote " << o.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- derender

struct DerenderOptions {
  std::string image, mask, input, out, config;
  std::optional<std::uint64_t> seed;
  double fov = Camera{}.fov_deg;
  int jobs = 1;
};

void write_loss_csv(const fs::path& path, const DerenderResult& r) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "stage,iteration,silhouette,image,albedo,sad,diffuse,total\n";
  for (std::size_t i = 0; i < r.shape.trace.size(); ++i)
    f << "shape," << i << ',' << num(r.shape.trace[i]) << ",0,0,0,0," << num(r.shape.trace[i]) << '\n';
  for (const TraceRow& t : r.appearance.trace)
    f << "appearance," << t.iteration << ',' << num(t.terms.silhouette) << ',' << num(t.terms.image) << ','
      << num(t.terms.albedo) << ',' << num(t.terms.sad) << ',' << num(t.terms.diffuse) << ',' << num(t.total)
      << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

void write_decomposition(const fs::path& dir, const DerenderResult& r, const RunConfig& rc, const Camera& camera) {
  fs::create_directories(dir);
  const Decomposition& d = r.decomposition;
  json appearance_trace = json::array();
  for (const TraceRow& t : r.appearance.trace)
    appearance_trace.push_back({{"iteration", t.iteration},
                                {"image", t.terms.image},
                                {"albedo", t.terms.albedo},
                                {"sad", t.terms.sad},
                                {"diffuse", t.terms.diffuse},
                                {"total", t.total}});
  const json j = {
      {"version", kDecompositionFileVersion},
      {"camera", camera_to_json(camera)},
      {"profile", to_json(d.profile)},
      {"pose", to_json(d.pose)},
      {"shininess", d.material.shininess},
      {"specular_albedo", d.material.specular_albedo},
      {"weights", to_json(rc.weights)},
      {"optimizer", to_json(rc.optimizer)},
      {"config_hash", config_hash(rc)},
      {"image_loss", r.image_loss},
      {"shape",
       {{"initial_loss", r.shape.initial_loss},
        {"loss", r.shape.loss},
        {"iterations", r.shape.iterations},
        {"early_stopped", r.shape.status == FitStatus::kEarlyStopped}}},
      {"appearance", {{"initial_loss", r.appearance.initial_loss}, {"loss", r.appearance.loss}}},
      {"loss_trace", {{"shape", r.shape.trace}, {"appearance", appearance_trace}}},
      {"files", {{"albedo", SceneFiles::kAlbedo}, {"env", SceneFiles::kEnv}, {"normals", SceneFiles::kNormals}}}};
  write_json(dir / DecompFiles::kDecomp, j);
  write_pfm(dir / SceneFiles::kAlbedo, d.material.albedo);
  write_pfm(dir / SceneFiles::kEnv, d.env);
  write_pfm(dir / SceneFiles::kNormals, r.appearance.problem.normals);
  ScalarMap valid(r.appearance.problem.valid.rows(), r.appearance.problem.valid.cols());
  for (std::size_t i = 0; i < valid.size(); ++i) valid[i] = r.appearance.problem.valid[i];
  write_png(dir / DecompFiles::kValid, valid);
  write_png(dir / DecompFiles::kRecon, r.reconstruction);
  write_loss_csv(dir / DecompFiles::kLoss, r);
}

DerenderResult derender_files(const fs::path& image_path, const fs::path& mask_path, const fs::path& out_dir,
                              const RunConfig& rc, double fov) {
  const ColorMap image = read_png_color(image_path);
  const ScalarMap mask = read_png_grey(mask_path);
  if (!image.same_shape(mask)) throw FormatError("image and mask sizes differ");
  Camera camera;
  camera.fov_deg = fov;
  camera.width = image.cols();
  camera.height = image.rows();
  const DerenderResult r = derender(image, mask, camera, rc.optimizer, rc.weights);
  write_decomposition(out_dir, r, rc, camera);
  return r;
}

int cmd_derender(const DerenderOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  if (!o.config.empty()) rc = run_config_from_json(read_json(o.config));
  if (o.seed) rc.optimizer.seed = *o.seed;
  const fs::path out_root(o.out);

  struct Job {
    std::string name;
    fs::path image, mask, out;
  };
  std::vector<Job> jobs;
  if (!o.input.empty()) {
    const fs::path in(o.input);
    if (!fs::is_directory(in)) throw IoError(in.string() + " is not a directory");
    for (const auto& entry : fs::directory_iterator(in)) {
      const fs::path dir = entry.path();
      if (entry.is_directory() && fs::exists(dir / SceneFiles::kImage) && fs::exists(dir / SceneFiles::kMask))
        jobs.push_back({dir.filename().string(), dir / SceneFiles::kImage, dir / SceneFiles::kMask,
                        out_root / dir.filename()});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.name < b.name; });
    if (jobs.empty()) throw FormatError(in.string() + ": no scene directories with image.png and mask.png");
  } else {
    jobs.push_back({fs::path(o.image).filename().string(), o.image, o.mask, out_root});
  }

  Failures failures;
  std::mutex print;
  parallel_for(static_cast<int>(jobs.size()), o.jobs, [&](int i) {
    try {
      const DerenderResult r = derender_files(jobs[i].image, jobs[i].mask, jobs[i].out, rc, o.fov);
      const std::lock_guard lock(print);
      out << jobs[i].name << ": silhouette loss " << num(r.shape.loss) << ", appearance loss "
          << num(r.appearance.loss) << ", image L1 " << num(r.image_loss) << '\n';
    } catch (...) {
      failures.report(err, jobs[i].name, std::current_exception());
    }
  });
  return failures.code;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred, gt, out;
  int jobs = 1;
};

struct SceneParams {
  CameraPose pose;
  double shininess = 0.0;
  double specular_albedo = 0.0;
};

SceneParams read_params(const fs::path& dir) {
  const bool decomp = fs::exists(dir / DecompFiles::kDecomp);
  const json j = read_json(dir / (decomp ? DecompFiles::kDecomp : SceneFiles::kScene));
  if (!j.is_object()) throw FormatError((dir / "").string() + ": expected object");
  SceneParams p;
  if (!j.contains("pose")) throw FormatError("pose: missing");
  p.pose = pose_from_json(j.at("pose"));
  for (auto [key, dst] : {std::pair{"shininess", &p.shininess}, std::pair{"specular_albedo", &p.specular_albedo}}) {
    if (!j.contains(key) || !j.at(key).is_number()) throw FormatError(std::string(key) + ": expected number");
    *dst = j.at(key).get<double>();
  }
  return p;
}

constexpr int kEvalColumns = 6;
using EvalRow = std::array<double, kEvalColumns>;

EvalRow evaluate_scene(const fs::path& pred, const fs::path& gt) {
  const SceneParams pp = read_params(pred), gp = read_params(gt);
  const ColorMap pa = read_pfm_color(pred / SceneFiles::kAlbedo), ga = read_pfm_color(gt / SceneFiles::kAlbedo);
  const ColorMap pn = read_pfm_color(pred / SceneFiles::kNormals), gn = read_pfm_color(gt / SceneFiles::kNormals);
  const ScalarMap pe = read_pfm_scalar(pred / SceneFiles::kEnv), ge = read_pfm_scalar(gt / SceneFiles::kEnv);
  if (!pa.same_shape(ga) || !pn.same_shape(gn) || !pa.same_shape(pn)) throw FormatError("texel map sizes differ");
  if (!pe.same_shape(ge)) throw FormatError("environment map sizes differ");
  Mask mask(pa.rows(), pa.cols(), 1);
  if (fs::exists(pred / DecompFiles::kValid)) {
    const ScalarMap v = read_png_grey(pred / DecompFiles::kValid);
    if (!v.same_shape(mask)) throw FormatError("valid.png size differs from the albedo map");
    for (std::size_t i = 0; i < v.size(); ++i) mask[i] = v[i] >= 0.5 ? 1 : 0;
  }
  return {si_mse(pa, ga, &mask).value,
          normal_angular_error(pn, gn, &mask).degrees,
          pose_rmse(pp.pose, gp.pose),
          std::abs(pp.shininess - gp.shininess),
          std::abs(pp.specular_albedo - gp.specular_albedo),
          si_mse(pe, ge).value};
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path pred(o.pred), gt(o.gt);
  if (!fs::is_directory(gt)) throw IoError(gt.string() + " is not a directory");
  if (!fs::is_directory(pred)) throw IoError(pred.string() + " is not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(gt))
    if (entry.is_directory() && fs::exists(entry.path() / SceneFiles::kScene))
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw FormatError(gt.string() + ": no scenes");

  std::vector<std::optional<EvalRow>> rows(ids.size());
  Failures failures;
  std::mutex warn;
  parallel_for(static_cast<int>(ids.size()), o.jobs, [&](int i) {
    if (!fs::is_directory(pred / ids[i])) {
      const std::lock_guard lock(warn);
      err << "warning: scene " << ids[i] << " missing from " << pred.string() << ", skipped\n";
      return;
    }
    try {
      rows[i] = evaluate_scene(pred / ids[i], gt / ids[i]);
    } catch (...) {
      failures.report(err, ids[i], std::current_exception());
    }
  });

  std::ofstream f(o.out);
  if (!f) throw IoError("cannot open " + o.out + " for writing");
  f << "scene,albedo_si_mse,normal_error_deg,pose_rmse,shininess_rmse,specular_albedo_rmse,env_si_mse\n";
  std::vector<EvalRow> done;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!rows[i]) continue;
    done.push_back(*rows[i]);
    f << ids[i];
    for (double v : *rows[i]) f << ',' << num(v);
    f << '\n';
  }
  f << "mean±std";
  for (int c = 0; c < kEvalColumns; ++c) {
    double mean = 0.0, var = 0.0;
    for (const EvalRow& r : done) mean += r[c];
    mean /= std::max<std::size_t>(done.size(), 1);
    for (const EvalRow& r : done) var += (r[c] - mean) * (r[c] - mean);
    const double sd = done.size() > 1 ? std::sqrt(var / double(done.size() - 1)) : 0.0;
    f << ',' << num(mean) << "±" << num(sd);
  }
  f << '\n';
  if (!f) throw IoError("failed writing " + o.out);
  out << "evaluated " << done.size() << " of " << ids.size() << " scene(s) into " << o.out << '\n';
  return failures.code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse rendering of solids of revolution", "lathe"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset");
  g->add_option("--count", gen.count, "Number of scenes")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "First seed; scenes use seed .. seed + count - 1");
  g->add_option("--out", gen.out, "Dataset root")->required();
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
  g->add_option("--size", gen.size, "Image width and height in pixels")->check(CLI::PositiveNumber);
  g->add_option("--tex", gen.tex, "Texture rows and frontal columns")->check(CLI::PositiveNumber);
  g->add_flag("--diffuse-only", gen.diffuse_only, "Set specular albedo to 0");

  RenderOptions ren;
  auto* r = app.add_subcommand("render", "Render a scene or a decomposition");
  auto* scene_opt = r->add_option("--scene", ren.scene, "scene.json of a generated scene");
  auto* decomp_opt = r->add_option("--decomp", ren.decomp, "decomp.json written by derender");
  scene_opt->excludes(decomp_opt);
  r->add_option("--out", ren.out, "Output PNG")->required();
  r->add_option("--env", ren.env, "Replacement light intensities (PFM)");
  r->add_option("--pitch", ren.pitch, "Pitch override in degrees");
  r->add_option("--roll", ren.roll, "Roll override in degrees");

  DerenderOptions der;
  auto* d = app.add_subcommand("derender", "Recover shape, pose, material and lighting");
  auto* image_opt = d->add_option("--image", der.image, "Input image (PNG)");
  auto* mask_opt = d->add_option("--mask", der.mask, "Silhouette (grey PNG)");
  auto* input_opt = d->add_option("--input", der.input, "Directory of scene directories (batch mode)");
  image_opt->needs(mask_opt);
  mask_opt->needs(image_opt);
  input_opt->excludes(image_opt)->excludes(mask_opt);
  d->add_option("--out", der.out, "Output directory")->required();
  d->add_option("--config", der.config, "JSON with weights and optimizer settings");
  d->add_option("--seed", der.seed, "Patch sampling seed (default 0, or the config's)");
  d->add_option("--fov", der.fov, "Vertical field of view in degrees");
  d->add_option("--jobs", der.jobs, "Worker threads (batch mode)")->check(CLI::PositiveNumber);

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Compare predictions with ground truth");
  e->add_option("--pred", ev.pred, "Prediction root")->required();
  e->add_option("--gt", ev.gt, "Ground-truth dataset root")->required();
  e->add_option("--out", ev.out, "Output CSV")->required();
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (r->parsed() && ren.scene.empty() && ren.decomp.empty())
      throw CLI::RequiredError("render: one of --scene or --decomp");
    if (d->parsed() && der.input.empty() && der.image.empty())
      throw CLI::RequiredError("derender: --image and --mask, or --input");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& x) {
    err << "error: " << x.what() << '\n';
    return kBadInput;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out, err);
    if (r->parsed()) return cmd_render(ren, out);
    if (d->parsed()) return cmd_derender(der, out, err);
    return cmd_eval(ev, out, err);
  } catch (...) {
    const auto ex = std::current_exception();
    err << "error: " << what(ex) << '\n';
    return exit_code(ex);
  }
}

}  // namespace lathe::cli
