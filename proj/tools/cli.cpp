#include "nsdf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "nsdf/checkpoint.hpp"
#include "nsdf/distance_transform.hpp"
#include "nsdf/io.hpp"
#include "nsdf/marching_cubes.hpp"
#include "nsdf/mesh_query.hpp"
#include "nsdf/metrics.hpp"
#include "nsdf/parallel.hpp"
#include "nsdf/phantom.hpp"
#include "nsdf/shapemodel.hpp"

namespace nsdf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path))
    throw ConfigError(std::string(what) + " directory does not exist: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

json landmarks_to_json(const Landmarks& lm) {
  return json{{"lv_cm", {lm.lv_cm[0], lm.lv_cm[1], lm.lv_cm[2]}},
              {"rv_cm", {lm.rv_cm[0], lm.rv_cm[1], lm.rv_cm[2]}},
              {"la_cm", {lm.la_cm[0], lm.la_cm[1], lm.la_cm[2]}}};
}

Landmarks landmarks_from_json(const json& j) {
  Landmarks lm;
  for (int a = 0; a < 3; ++a) {
    lm.lv_cm[a] = j.at("lv_cm").at(a).get<Real>();
    lm.rv_cm[a] = j.at("rv_cm").at(a).get<Real>();
    lm.la_cm[a] = j.at("la_cm").at(a).get<Real>();
  }
  return lm;
}

json frame_to_json(const CanonicalFrame& f) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(f.rotation(r, c));
  return json{{"rotation", rot},
              {"translation", {f.translation[0], f.translation[1],
                               f.translation[2]}},
              {"scale", f.scale}};
}

CanonicalFrame frame_from_json(const json& j) {
  CanonicalFrame f;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      f.rotation(r, c) = j.at("rotation").at(3 * r + c).get<Real>();
  for (int a = 0; a < 3; ++a)
    f.translation[a] = j.at("translation").at(a).get<Real>();
  f.scale = j.at("scale").get<Real>();
  f.validate();
  return f;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------------------
// phantom

struct PhantomOptions {
  std::string out;
  int n_train = 50;
  int n_val = 7;
  int n_test = 20;
  uint64_t seed = 2026;
  Real in_plane_mm = 1.5;
  Real thru_plane_mm = 3.0;
  CohortJitter jitter;
  PhantomSpec base;
};

int cmd_phantom(const PhantomOptions& opt, const std::string& echo) {
  require_dir(opt.out, "output");
  const int total = opt.n_train + opt.n_val + opt.n_test;
  if (total <= 0) throw ConfigError("phantom: empty cohort requested");

  const fs::path cases_dir = fs::path(opt.out) / "cases";
  fs::create_directories(cases_dir);

  json manifest;
  manifest["seed"] = opt.seed;
  manifest["grid_spacing_mm"] = {opt.in_plane_mm, opt.in_plane_mm,
                                 opt.thru_plane_mm};
  manifest["cases"] = json::array();

  const Vec3 spacing(opt.in_plane_mm, opt.in_plane_mm, opt.thru_plane_mm);
  for (int i = 0; i < total; ++i) {
    PhantomCase c = generate(jitter_spec(opt.base, opt.jitter, opt.seed, i),
                             spacing);
    char id[32];
    std::snprintf(id, sizeof(id), "case_%03d", i);
    c.id = id;
    const char* split = i < opt.n_train              ? "train"
                        : i < opt.n_train + opt.n_val ? "val"
                                                      : "test";
    const fs::path dir = cases_dir / c.id;
    fs::create_directories(dir);
    write_ply((dir / "myo.ply").string(), c.myo_mesh);
    write_ply((dir / "rv.ply").string(), c.rv_mesh);
    write_label_grid((dir / "labels.nsdf-lbl").string(), c.label_grid);

    json sidecar;
    sidecar["id"] = c.id;
    sidecar["split"] = split;
    sidecar["landmarks"] = landmarks_to_json(c.landmarks);
    sidecar["spec"] = {
        {"seed", c.spec.seed},
        {"lv_outer_radii",
         {c.spec.lv_outer_radii[0], c.spec.lv_outer_radii[1],
          c.spec.lv_outer_radii[2]}},
        {"wall_thickness", c.spec.wall_thickness},
        {"rv_offset",
         {c.spec.rv_offset[0], c.spec.rv_offset[1], c.spec.rv_offset[2]}},
        {"rv_radii",
         {c.spec.rv_radii[0], c.spec.rv_radii[1], c.spec.rv_radii[2]}},
        {"la_offset",
         {c.spec.la_offset[0], c.spec.la_offset[1], c.spec.la_offset[2]}},
        {"bump_amplitude", c.spec.bump_amplitude},
        {"bump_frequency", c.spec.bump_frequency},
        {"mesh_subdivisions", c.spec.mesh_subdivisions}};
    write_text((dir / "case.json").string(), sidecar.dump(2) + "\n");

    manifest["cases"].push_back({{"id", c.id}, {"split", split}});
    std::printf("phantom: wrote %s (%s)\n", c.id.c_str(), split);
  }
  write_text((fs::path(opt.out) / "manifest.json").string(),
             manifest.dump(2) + "\n");
  write_text((fs::path(opt.out) / "effective_config.ini").string(), echo);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// shared data loading

struct CaseData {
  std::string id;
  std::string split;
  TriangleMesh myo_mm;
  TriangleMesh rv_mm;
  Landmarks landmarks;
  fs::path dir;
};

std::vector<CaseData> load_cases(const std::string& data_dir,
                                 const std::string& split_filter,
                                 bool load_meshes = true) {
  const fs::path root(data_dir);
  const json manifest = load_json((root / "manifest.json").string());
  std::vector<CaseData> cases;
  for (const auto& entry : manifest.at("cases")) {
    CaseData c;
    c.id = entry.at("id").get<std::string>();
    c.split = entry.at("split").get<std::string>();
    if (!split_filter.empty() && c.split != split_filter) continue;
    c.dir = root / "cases" / c.id;
    const json sidecar = load_json((c.dir / "case.json").string());
    c.landmarks = landmarks_from_json(sidecar.at("landmarks"));
    if (load_meshes) {
      c.myo_mm = read_ply((c.dir / "myo.ply").string());
      c.myo_mm.structure = StructureId::MYO;
      c.rv_mm = read_ply((c.dir / "rv.ply").string());
      c.rv_mm.structure = StructureId::RV;
    }
    cases.push_back(std::move(c));
  }
  if (cases.empty())
    throw DataError("no cases with split '" + split_filter + "' in " +
                    data_dir);
  return cases;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string out;
  TrainConfig cfg;
};

int cmd_train(const TrainOptions& opt, const std::string& echo) {
  require_dir(opt.data, "data");
  require_dir(opt.out, "output");
  opt.cfg.validate();

  const std::vector<CaseData> train_cases = load_cases(opt.data, "train");
  std::vector<CaseData> val_cases;
  try {
    val_cases = load_cases(opt.data, "val");
  } catch (const DataError&) {
    // validation split may be absent for smoke runs
  }

  // Rotate/translate everything into the shared frame, then freeze the
  // global scale on the training corpus.
  std::vector<CanonicalFrame> train_frames, val_frames;
  Index total_verts = 0;
  for (const auto& c : train_cases) {
    train_frames.push_back(frame_from_landmarks(c.landmarks));
    total_verts += c.myo_mm.num_vertices() + c.rv_mm.num_vertices();
  }
  for (const auto& c : val_cases)
    val_frames.push_back(frame_from_landmarks(c.landmarks));

  MatX3 corpus(total_verts, 3);
  Index at = 0;
  for (size_t i = 0; i < train_cases.size(); ++i) {
    const auto put = [&](const TriangleMesh& mesh) {
      for (Index v = 0; v < mesh.num_vertices(); ++v)
        corpus.row(at++) =
            train_frames[i].apply(Vec3(mesh.vertices.row(v))).transpose();
    };
    put(train_cases[i].myo_mm);
    put(train_cases[i].rv_mm);
  }
  const Real scale = fit_scale(corpus);
  std::printf("train: %zu train / %zu val shapes, global scale %.8g\n",
              train_cases.size(), val_cases.size(), scale);

  auto canonicalize = [&](const CaseData& c, CanonicalFrame f) {
    f.scale = scale;
    TrainShape s;
    s.id = c.id;
    s.myo = apply_frame(f, c.myo_mm);
    s.rv = apply_frame(f, c.rv_mm);
    return s;
  };
  std::vector<TrainShape> train_shapes, val_shapes;
  for (size_t i = 0; i < train_cases.size(); ++i)
    train_shapes.push_back(canonicalize(train_cases[i], train_frames[i]));
  for (size_t i = 0; i < val_cases.size(); ++i)
    val_shapes.push_back(canonicalize(val_cases[i], val_frames[i]));

  CanonicalFrame model_frame;
  model_frame.scale = scale;

  std::string loss_csv = "epoch,train_loss,val_loss,lr\n";
  const TrainedModel model =
      train(train_shapes, val_shapes, opt.cfg, model_frame,
            [&](const EpochLog& log) {
              char line[160];
              if (std::isnan(log.val_loss))
                std::snprintf(line, sizeof(line), "%d,%.17g,,%.17g\n",
                              log.epoch, log.train_loss, log.lr);
              else
                std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n",
                              log.epoch, log.train_loss, log.val_loss, log.lr);
              loss_csv += line;
              if ((log.epoch + 1) % 25 == 0 || !std::isnan(log.val_loss))
                std::printf("train: epoch %d loss %.6g val %.6g lr %.3g\n",
                            log.epoch, log.train_loss, log.val_loss, log.lr);
            });

  save_checkpoint((fs::path(opt.out) / "checkpoint.nsdf").string(), model);
  write_text((fs::path(opt.out) / "loss.csv").string(), loss_csv);
  write_text((fs::path(opt.out) / "effective_config.ini").string(), echo);
  std::printf("train: best validation loss %.8g\n", model.best_validation_loss);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructCliOptions {
  std::string checkpoint;
  std::string case_dir;
  std::string samples;
  std::string out;
  std::string mode = "iso";
  Index points = 500;
  int resolution = 200;
  int iters = 100;
  Real lr = 1e-3;
  uint64_t seed = 1;
  bool save_sdf = false;
};

int cmd_reconstruct(const ReconstructCliOptions& opt, const std::string& echo) {
  require_dir(opt.out, "output");
  const TrainedModel model = load_checkpoint(opt.checkpoint);

  SampleSet observed;
  CanonicalFrame frame;  // identity rotation unless a case supplies landmarks
  frame.scale = model.frame.scale;

  if (!opt.case_dir.empty()) {
    if (!fs::is_directory(opt.case_dir))
      throw DataError("unknown case: " + opt.case_dir);
    const json sidecar =
        load_json((fs::path(opt.case_dir) / "case.json").string());
    frame = frame_from_landmarks(landmarks_from_json(sidecar.at("landmarks")));
    frame.scale = model.frame.scale;
    const LabelGrid labels = read_label_grid(
        (fs::path(opt.case_dir) / "labels.nsdf-lbl").string());

    const SampleSet reference =
        sample_test_from_grid(labels, model.config.sampling, frame);
    Rng rng = Rng(opt.seed).stream(stream_label::kSubsample);
    if (opt.mode == "iso") {
      observed = subsample_iso(reference, opt.points, rng);
    } else if (opt.mode == "sax") {
      observed = subsample_sax_like(reference, opt.points,
                                    model.config.sampling.sax_slice_spacing,
                                    model.config.sampling.sax_thickness_tol,
                                    rng);
    } else if (opt.mode == "saxlax") {
      const SampleSet sax = subsample_sax_like(
          reference, opt.points, model.config.sampling.sax_slice_spacing,
          model.config.sampling.sax_thickness_tol, rng);
      const SampleSet lax =
          lax_slice(reference, model.config.sampling.sax_thickness_tol);
      observed = subsample_sax_plus_lax(sax, lax, opt.points, rng);
    } else {
      throw ConfigError("reconstruct: unknown mode '" + opt.mode + "'");
    }
  } else if (!opt.samples.empty()) {
    observed = opt.samples.ends_with(".csv") ? read_sample_csv(opt.samples)
                                             : read_sample_binary(opt.samples);
  } else {
    throw ConfigError("reconstruct: provide --case or --samples");
  }

  ReconstructOptions ropt;
  ropt.resolution = opt.resolution;
  ropt.iters = opt.iters;
  ropt.lr = opt.lr;
  ropt.lambda = model.config.lambda_reg;
  ropt.seed = opt.seed;

  std::pair<SdfGrid, SdfGrid> grids;
  const Reconstruction rec = reconstruct(model, observed, ropt, &grids);

  const fs::path out(opt.out);
  write_ply((out / "myo.ply").string(), rec.myo);
  write_ply((out / "rv.ply").string(), rec.rv);
  if (!rec.myo_empty)
    write_ply((out / "myo_mm.ply").string(), invert_frame(frame, rec.myo));
  if (!rec.rv_empty)
    write_ply((out / "rv_mm.ply").string(), invert_frame(frame, rec.rv));
  if (opt.save_sdf) {
    write_sdf_grid((out / "myo.nsdf-sdf").string(), grids.first);
    write_sdf_grid((out / "rv.nsdf-sdf").string(), grids.second);
  }
  write_sample_csv((out / "observed.csv").string(), observed);

  json diag;
  diag["fit_loss"] = rec.fit_loss;
  diag["iters"] = opt.iters;
  diag["resolution"] = opt.resolution;
  diag["seed"] = opt.seed;
  diag["mode"] = opt.mode;
  diag["observed_rows"] = observed.size();
  diag["observed_out_of_domain"] = rec.observed_out_of_domain;
  diag["myo_empty"] = rec.myo_empty;
  diag["rv_empty"] = rec.rv_empty;
  diag["frame"] = frame_to_json(frame);
  json latent = json::array();
  for (Index i = 0; i < rec.latent.size(); ++i) latent.push_back(rec.latent[i]);
  diag["latent"] = latent;
  write_text((out / "diagnostics.json").string(), diag.dump(2) + "\n");
  write_text((out / "effective_config.ini").string(), echo);
  std::printf("reconstruct: fit loss %.6g, myo %s, rv %s\n", rec.fit_loss,
              rec.myo_empty ? "EMPTY" : "ok", rec.rv_empty ? "EMPTY" : "ok");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string data;
  std::string split = "test";
  std::string case_filter;
  std::vector<std::string> recon;  // name=rootdir
  std::string out;
  Real slice_px_mm = 1.0;
  Index mesh_samples = 20000;
  uint64_t seed = 1;
};

struct CaseMetrics {
  // keyed by structure name
  std::map<std::string, MetricReport> slice;
  std::map<std::string, MetricReport> mesh;
};

SliceMask mask_from_mesh_plane(const TriangleMesh& mesh_mm,
                               const CanonicalFrame& frame, Real px_norm,
                               const Vec2& px_spacing_mm,
                               const Eigen::Vector2i& dims) {
  const MeshQuery query(mesh_mm);
  SliceMask mask = make_mask(dims[0], dims[1], px_spacing_mm);
  for (int r = 0; r < dims[1]; ++r)
    for (int c = 0; c < dims[0]; ++c) {
      const Vec3 p_norm(-1.0 + c * px_norm, 0.0, -1.0 + r * px_norm);
      const Vec3 p_mm = frame.invert(p_norm);
      mask.set(r, c, query.winding_number(p_mm) >= 0.5);
    }
  return mask;
}

CaseMetrics evaluate_case(const CaseData& ref, const fs::path& recon_dir,
                          const EvaluateOptions& opt, Rng& rng) {
  CaseMetrics out;
  const json diag = load_json((recon_dir / "diagnostics.json").string());
  const CanonicalFrame frame = frame_from_json(diag.at("frame"));

  // ---- mesh metrics (mm), Table-2 style
  for (const char* structure : {"MYO", "RV"}) {
    const bool is_myo = std::string(structure) == "MYO";
    const TriangleMesh& ref_mesh = is_myo ? ref.myo_mm : ref.rv_mm;
    const fs::path mm_path = recon_dir / (is_myo ? "myo_mm.ply" : "rv_mm.ply");
    if (!fs::exists(mm_path))
      throw DataError("missing reconstruction mesh: " + mm_path.string());
    const TriangleMesh rec_mesh = read_ply(mm_path.string());

    MetricReport report;
    report.case_id = ref.id;
    report.structure = structure;
    const SurfaceDistances d =
        mesh_surface_distances(ref_mesh, rec_mesh, opt.mesh_samples, rng);
    report.hd_mm = d.hd;
    report.hd95_mm = d.hd95;
    report.assd_mm = d.assd;
    report.dsc = std::numeric_limits<Real>::quiet_NaN();  // mesh-level row
    const MeshValidity v = validate_mesh(rec_mesh);
    report.volume_ml =
        v.watertight ? mesh_volume_ml(rec_mesh)
                     : std::numeric_limits<Real>::quiet_NaN();
    out.mesh[structure] = report;
  }

  // ---- slice metrics on the long-axis plane (canonical x-z), Table-1 style
  const Real px_norm = opt.slice_px_mm * frame.scale;
  const int n_px = int(std::floor(2.0 / px_norm)) + 1;
  const Eigen::Vector2i dims(n_px, n_px);
  const Vec2 spacing_mm(opt.slice_px_mm, opt.slice_px_mm);

  const bool have_sdf = fs::exists(recon_dir / "myo.nsdf-sdf") &&
                        fs::exists(recon_dir / "rv.nsdf-sdf");
  auto recon_mask = [&](bool is_myo) {
    if (have_sdf) {
      const SdfGrid sdf = read_sdf_grid(
          (recon_dir / (is_myo ? "myo.nsdf-sdf" : "rv.nsdf-sdf")).string());
      SliceMask m = slice_from_sdf(sdf, Vec3(-1, 0, -1), Vec3(1, 0, 0),
                                   Vec3(0, 0, 1), Vec2(px_norm, px_norm), dims);
      m.px_spacing = spacing_mm;  // metric distances are in mm
      return m;
    }
    const TriangleMesh rec = read_ply(
        (recon_dir / (is_myo ? "myo.ply" : "rv.ply")).string());
    const MeshQuery query(rec);
    SliceMask m = make_mask(dims[0], dims[1], spacing_mm);
    for (int r = 0; r < dims[1]; ++r)
      for (int c = 0; c < dims[0]; ++c) {
        const Vec3 p(-1.0 + c * px_norm, 0.0, -1.0 + r * px_norm);
        m.set(r, c, query.winding_number(p) >= 0.5);
      }
    return m;
  };

  const SliceMask ref_myo =
      mask_from_mesh_plane(ref.myo_mm, frame, px_norm, spacing_mm, dims);
  const SliceMask ref_rv =
      mask_from_mesh_plane(ref.rv_mm, frame, px_norm, spacing_mm, dims);
  const SliceMask rec_myo = recon_mask(true);
  const SliceMask rec_rv = recon_mask(false);
  const SliceMask ref_pool = fill_blood_pool(ref_myo);
  const SliceMask rec_pool = fill_blood_pool(rec_myo);

  auto slice_report = [&](const char* name, const SliceMask& a,
                          const SliceMask& b) {
    MetricReport report;
    report.case_id = ref.id;
    report.structure = name;
    report.dsc = dice(a, b);
    if (!a.empty_mask() && !b.empty_mask()) {
      const SurfaceDistances d = surface_distances(a, b);
      report.hd_mm = d.hd;
      report.hd95_mm = d.hd95;
      report.assd_mm = d.assd;
    } else {
      report.hd_mm = report.hd95_mm = report.assd_mm =
          std::numeric_limits<Real>::quiet_NaN();
    }
    out.slice[name] = report;
  };
  slice_report("LVBP", ref_pool, rec_pool);
  slice_report("MYO", ref_myo, rec_myo);
  slice_report("RV", ref_rv, rec_rv);
  return out;
}

std::string metrics_csv(const std::vector<MetricReport>& rows) {
  std::string csv = "case_id,structure,dsc,hd,hd95,assd,volume_ml\n";
  char line[256];
  for (const auto& r : rows) {
    auto field = [](Real v) {
      if (std::isnan(v)) return std::string();
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    std::snprintf(line, sizeof(line), "%s,%s,%s,%s,%s,%s,%s\n",
                  r.case_id.c_str(), r.structure.c_str(),
                  field(r.dsc).c_str(), field(r.hd_mm).c_str(),
                  field(r.hd95_mm).c_str(), field(r.assd_mm).c_str(),
                  field(r.volume_ml).c_str());
    csv += line;
  }
  return csv;
}

int cmd_evaluate(const EvaluateOptions& opt, const std::string& echo) {
  require_dir(opt.data, "data");
  require_dir(opt.out, "output");
  if (opt.recon.empty())
    throw ConfigError("evaluate: at least one --recon name=dir is required");

  std::vector<CaseData> cases = load_cases(opt.data, opt.split);
  if (!opt.case_filter.empty()) {
    std::vector<CaseData> filtered;
    for (auto& c : cases)
      if (c.id == opt.case_filter) filtered.push_back(std::move(c));
    if (filtered.empty())
      throw DataError("unknown case id: " + opt.case_filter);
    cases = std::move(filtered);
  }

  json aggregate_doc;
  for (const std::string& spec : opt.recon) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw ConfigError("evaluate: --recon expects name=dir, got " + spec);
    const std::string name = spec.substr(0, eq);
    const fs::path root = spec.substr(eq + 1);
    require_dir(root.string(), "reconstruction");

    std::vector<MetricReport> slice_rows, mesh_rows;
    std::map<std::string, std::map<std::string, std::vector<Real>>> agg;
    std::vector<Real> ref_vol_myo, ref_vol_rv, vol_err_myo, vol_err_rv;
    for (const auto& c : cases) {
      Rng rng = Rng(opt.seed).stream(stream_label::kMetrics,
                                     Rng::mix64(std::hash<std::string>{}(c.id)));
      const CaseMetrics m = evaluate_case(c, root / c.id, opt, rng);
      for (const auto& [structure, report] : m.slice) {
        slice_rows.push_back(report);
        agg[structure]["dsc"].push_back(report.dsc);
        if (!std::isnan(report.hd_mm)) {
          agg[structure]["hd"].push_back(report.hd_mm);
          agg[structure]["hd95"].push_back(report.hd95_mm);
          agg[structure]["assd"].push_back(report.assd_mm);
        }
      }
      for (const auto& [structure, report] : m.mesh) {
        mesh_rows.push_back(report);
        agg[structure]["mesh_hd"].push_back(report.hd_mm);
        agg[structure]["mesh_hd95"].push_back(report.hd95_mm);
        agg[structure]["mesh_assd"].push_back(report.assd_mm);
        const bool is_myo = structure == "MYO";
        const Real ref_vol = mesh_volume_ml(is_myo ? c.myo_mm : c.rv_mm);
        (is_myo ? ref_vol_myo : ref_vol_rv).push_back(ref_vol);
        if (!std::isnan(report.volume_ml)) {
          agg[structure]["volume_ml"].push_back(report.volume_ml);
          (is_myo ? vol_err_myo : vol_err_rv)
              .push_back(std::abs(report.volume_ml - ref_vol) / ref_vol);
        }
      }
    }

    write_text((fs::path(opt.out) / ("slice_metrics_" + name + ".csv")).string(),
               metrics_csv(slice_rows));
    write_text((fs::path(opt.out) / ("mesh_metrics_" + name + ".csv")).string(),
               metrics_csv(mesh_rows));

    json variant;
    for (const auto& [structure, metrics] : agg) {
      json s;
      for (const auto& [metric, values] : metrics) {
        const MetricAggregate a = aggregate(values);
        s[metric] = {{"mean", a.mean}, {"std", a.stddev}, {"n", a.n}};
      }
      variant[structure] = s;
    }
    variant["MYO"]["ref_volume_ml"] = {
        {"mean", aggregate(ref_vol_myo).mean},
        {"std", aggregate(ref_vol_myo).stddev}};
    variant["RV"]["ref_volume_ml"] = {{"mean", aggregate(ref_vol_rv).mean},
                                      {"std", aggregate(ref_vol_rv).stddev}};
    json verr;
    verr["MYO_median"] = [&] {
      auto v = vol_err_myo;
      std::sort(v.begin(), v.end());
      return v.empty() ? std::numeric_limits<Real>::quiet_NaN()
                       : v[v.size() / 2];
    }();
    verr["RV_median"] = [&] {
      auto v = vol_err_rv;
      std::sort(v.begin(), v.end());
      return v.empty() ? std::numeric_limits<Real>::quiet_NaN()
                       : v[v.size() / 2];
    }();
    variant["volume_error_fraction"] = verr;
    aggregate_doc[name] = variant;
    std::printf("evaluate: variant '%s' over %zu cases done\n", name.c_str(),
                cases.size());
  }
  write_text((fs::path(opt.out) / "aggregate.json").string(),
             aggregate_doc.dump(2) + "\n");
  write_text((fs::path(opt.out) / "effective_config.ini").string(), echo);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// export-mesh

struct ExportOptions {
  std::string sdf;
  std::string labels;
  std::string structure = "MYO";
  Real iso = 0.0;
  std::string out;
};

int cmd_export_mesh(const ExportOptions& opt) {
  TriangleMesh mesh;
  if (!opt.sdf.empty()) {
    mesh = marching_cubes(read_sdf_grid(opt.sdf), opt.iso);
  } else if (!opt.labels.empty()) {
    const LabelGrid grid = read_label_grid(opt.labels);
    const StructureId s =
        opt.structure == "RV" ? StructureId::RV : StructureId::MYO;
    mesh = marching_cubes(distance_transform(grid, s), opt.iso);
  } else {
    throw ConfigError("export-mesh: provide --sdf or --labels");
  }
  if (opt.out.ends_with(".obj"))
    write_obj(opt.out, mesh);
  else
    write_ply(opt.out, mesh);
  std::printf("export-mesh: %ld vertices, %ld triangles -> %s\n",
              long(mesh.num_vertices()), long(mesh.num_triangles()),
              opt.out.c_str());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"nsdf: joint neural signed-distance shape model toolkit"};
  app.set_config("--config", "", "Key-value config file ([section] = subcommand)");
  app.require_subcommand(1);

  int threads = 0;
  if (const char* env = std::getenv("NSDF_THREADS"))
    threads = std::atoi(env);
  app.add_option("--threads", threads, "Worker thread cap (NSDF_THREADS)");

  PhantomOptions ph;
  CLI::App* phantom = app.add_subcommand("phantom", "Generate a phantom cohort");
  phantom->add_option("--out", ph.out, "Output directory (must exist)")
      ->required();
  phantom->add_option("--train", ph.n_train, "Training cases");
  phantom->add_option("--val", ph.n_val, "Validation cases");
  phantom->add_option("--test", ph.n_test, "Held-out test cases");
  phantom->add_option("--seed", ph.seed, "Cohort seed");
  phantom->add_option("--in-plane", ph.in_plane_mm, "Label-grid in-plane mm");
  phantom->add_option("--thru-plane", ph.thru_plane_mm,
                      "Label-grid through-plane mm");
  phantom->add_option("--subdivisions", ph.base.mesh_subdivisions,
                      "Icosphere subdivisions");
  phantom->add_option("--jitter-radii", ph.jitter.radii_frac,
                      "Radius jitter fraction");
  phantom->add_option("--jitter-offset", ph.jitter.offset_mm,
                      "Offset jitter (mm)");

  TrainOptions tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the auto-decoder");
  train_cmd->add_option("--data", tr.data, "Cohort directory")->required();
  train_cmd->add_option("--out", tr.out, "Output directory (must exist)")
      ->required();
  train_cmd->add_option("--epochs", tr.cfg.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", tr.cfg.batch_size, "Shapes per batch");
  train_cmd->add_option("--lr", tr.cfg.lr, "Peak learning rate");
  train_cmd->add_option("--lambda", tr.cfg.lambda_reg, "Latent penalty");
  train_cmd->add_option("--latent-dim", tr.cfg.latent_dim, "Latent size");
  train_cmd->add_option("--hidden-width", tr.cfg.hidden_width, "Hidden width");
  train_cmd->add_option("--hidden-layers", tr.cfg.hidden_layers,
                        "Hidden layer count");
  train_cmd->add_option("--validate-every", tr.cfg.validate_every,
                        "Validation period (epochs)");
  train_cmd->add_option("--val-iters", tr.cfg.val_latent_iters,
                        "Validation latent iterations");
  train_cmd->add_option("--val-lr", tr.cfg.val_latent_lr,
                        "Validation latent learning rate");
  train_cmd->add_option("--seed", tr.cfg.seed, "Run seed");
  train_cmd->add_option("--n-on", tr.cfg.sampling.n_on_per_structure,
                        "On-surface points per structure per epoch");
  train_cmd->add_option("--n-off", tr.cfg.sampling.n_off_per_structure,
                        "Off-surface points per structure per epoch");
  train_cmd->add_option("--noise-sigma", tr.cfg.sampling.noise_sigma,
                        "Off-surface noise sigma (normalized)");
  train_cmd->add_flag("--schedule-per-batch", tr.cfg.schedule_per_batch,
                      "Advance the cosine schedule per batch instead of per epoch");
  train_cmd->add_option("--schedule-total", tr.cfg.schedule_total,
                        "Cosine schedule length (0 = epochs)");

  ReconstructCliOptions rc;
  CLI::App* recon = app.add_subcommand("reconstruct",
                                       "Fit a latent and extract surfaces");
  recon->add_option("--checkpoint", rc.checkpoint, "Model checkpoint")
      ->required();
  recon->add_option("--case", rc.case_dir, "Case directory");
  recon->add_option("--samples", rc.samples, "Observed sample file (.csv/.bin)");
  recon->add_option("--out", rc.out, "Output directory (must exist)")
      ->required();
  recon->add_option("--mode", rc.mode, "iso | sax | saxlax");
  recon->add_option("--points", rc.points, "Points per structure");
  recon->add_option("--resolution", rc.resolution, "Decode lattice resolution");
  recon->add_option("--iters", rc.iters, "Latent iterations");
  recon->add_option("--lr", rc.lr, "Latent learning rate");
  recon->add_option("--seed", rc.seed, "Latent-init / subsampling seed");
  recon->add_flag("--save-sdf", rc.save_sdf, "Write decoded SDF volumes");

  EvaluateOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compare reconstructions");
  eval_cmd->add_option("--data", ev.data, "Cohort directory")->required();
  eval_cmd->add_option("--split", ev.split, "Cohort split to evaluate");
  eval_cmd->add_option("--case", ev.case_filter, "Restrict to one case id");
  eval_cmd->add_option("--recon", ev.recon, "name=reconstruction-root (repeatable)")
      ->required();
  eval_cmd->add_option("--out", ev.out, "Output directory (must exist)")
      ->required();
  eval_cmd->add_option("--slice-px", ev.slice_px_mm, "Slice pixel size (mm)");
  eval_cmd->add_option("--mesh-samples", ev.mesh_samples,
                       "Surface samples per mesh");
  eval_cmd->add_option("--seed", ev.seed, "Sampling seed");

  ExportOptions ex;
  CLI::App* export_cmd =
      app.add_subcommand("export-mesh", "Isosurface a stored volume");
  export_cmd->add_option("--sdf", ex.sdf, "SDF grid file");
  export_cmd->add_option("--labels", ex.labels, "Label grid file");
  export_cmd->add_option("--structure", ex.structure, "MYO | RV");
  export_cmd->add_option("--iso", ex.iso, "Iso level");
  export_cmd->add_option("--out", ex.out, "Output mesh (.ply/.obj)")
      ->required();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return kExitOk;
    }
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  if (threads > 0) set_max_threads(threads);

  try {
    const std::string echo = app.config_to_str(true, false);
    if (phantom->parsed()) return cmd_phantom(ph, echo);
    if (train_cmd->parsed()) return cmd_train(tr, echo);
    if (recon->parsed()) return cmd_reconstruct(rc, echo);
    if (eval_cmd->parsed()) return cmd_evaluate(ev, echo);
    if (export_cmd->parsed()) return cmd_export_mesh(ex);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
}

}  // namespace nsdf
