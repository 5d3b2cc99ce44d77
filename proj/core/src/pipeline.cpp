#include "fvfseg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "fvfseg/metrics.hpp"
#include "fvfseg/phantom.hpp"
#include "fvfseg/volume_io.hpp"

namespace fvfseg {

namespace fs = std::filesystem;

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

int to_int(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  require(n >= -2147483647LL && n <= 2147483647LL, ErrorCode::Config,
          "value of '" + key + "' is out of range");
  return static_cast<int>(n);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input", [](auto& c, auto&, auto& v) { c.input = v; }},
      {"atlas_dir", [](auto& c, auto&, auto& v) { c.atlas_dir = v; }},
      {"model", [](auto& c, auto&, auto& v) { c.model = v; }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"ground_truth", [](auto& c, auto&, auto& v) { c.ground_truth = v; }},
      {"candidate", [](auto& c, auto&, auto& v) { c.candidate = v; }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         const long long n = parse_int(k, v);
         require(n >= 0, ErrorCode::Config, "seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(n);
       }},
      {"phantom_size", [](auto& c, auto& k, auto& v) { c.phantom_size = to_int(k, v); }},
      {"tumor_shape", [](auto& c, auto&, auto& v) { c.tumor_shape = v; }},
      {"tumor_offset", [](auto& c, auto& k, auto& v) { c.tumor_offset = parse_real(k, v); }},
      {"em_components", [](auto& c, auto& k, auto& v) { c.em.components = to_int(k, v); }},
      {"em_tol", [](auto& c, auto& k, auto& v) { c.em.tol = parse_real(k, v); }},
      {"em_max_iters", [](auto& c, auto& k, auto& v) { c.em.max_iters = to_int(k, v); }},
      {"em_max_samples",
       [](auto& c, auto& k, auto& v) {
         const long long n = parse_int(k, v);
         require(n >= 1, ErrorCode::Config, "em_max_samples must be >= 1");
         c.em_max_samples = static_cast<std::size_t>(n);
       }},
      {"omega", [](auto& c, auto& k, auto& v) { c.gbbm.omega = parse_real(k, v); }},
      {"psi", [](auto& c, auto& k, auto& v) { c.psi = parse_real(k, v); }},
      {"strip_depth",
       [](auto& c, auto& k, auto& v) { c.candidate_params.strip_depth = to_int(k, v); }},
      {"erode_iters",
       [](auto& c, auto& k, auto& v) { c.candidate_params.erode_iters = to_int(k, v); }},
      {"dilate_iters",
       [](auto& c, auto& k, auto& v) { c.candidate_params.dilate_iters = to_int(k, v); }},
      {"connectivity",
       [](auto& c, auto& k, auto& v) {
         c.candidate_params.connectivity = connectivity_from_int(to_int(k, v));
       }},
      {"alpha", [](auto& c, auto& k, auto& v) { c.evolution.alpha = parse_real(k, v); }},
      {"beta", [](auto& c, auto& k, auto& v) { c.evolution.beta = parse_real(k, v); }},
      {"dt", [](auto& c, auto& k, auto& v) { c.evolution.dt = parse_real(k, v); }},
      {"max_iters", [](auto& c, auto& k, auto& v) { c.evolution.max_iters = to_int(k, v); }},
      {"reinit_every",
       [](auto& c, auto& k, auto& v) { c.evolution.reinit_every = to_int(k, v); }},
      {"stop_tol", [](auto& c, auto& k, auto& v) { c.evolution.stop_tol = parse_real(k, v); }},
      {"band_halfwidth", [](auto& c, auto& k, auto& v) { c.band_halfwidth = parse_real(k, v); }},
      {"edge_sigma", [](auto& c, auto& k, auto& v) { c.edge_sigma = parse_real(k, v); }},
      {"edge_weight", [](auto& c, auto& k, auto& v) { c.edge_weight = parse_real(k, v); }},
  };
  return table;
}

// Runs one stage, prefixing any library error with the stage name.
template <typename F>
auto in_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const NoCandidateError& e) {
    throw NoCandidateError(e.step(), std::string(stage) + ": " + e.what());
  } catch (const InstabilityError& e) {
    throw InstabilityError(e.iteration(), std::string(stage) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::Io,
          "cannot create output directory '" + dir.string() + "'");
}

void require_path(const fs::path& p, const char* key) {
  require(!p.empty(), ErrorCode::Config, std::string("missing required setting '") + key + "'");
}

TissueMixtureModel fit_on_atlas(const PipelineConfig& cfg, const ProbabilisticAtlas& atlas,
                                KeyValues& report, std::string* trace) {
  const NormalizedVolume nt = normalize_intensity(atlas.template_image, atlas.brain_mask);
  const std::vector<double> samples =
      masked_samples(nt.volume, atlas.brain_mask, cfg.em_max_samples);
  EmOptions opt = cfg.em;
  opt.seed = cfg.seed;
  const EmResult em = fit_em(samples, opt);
  report.set("em_samples", samples.size());
  report.set("em_iterations", em.iterations);
  report.set("em_converged", em.converged ? 1 : 0);
  report.set("em_log_likelihood", em.log_likelihood.back());
  if (trace) {
    std::ostringstream os;
    for (std::size_t i = 0; i < em.log_likelihood.size(); ++i) {
      os << "iteration=" << i << " log_likelihood=" << format_real(em.log_likelihood[i]) << '\n';
    }
    *trace = os.str();
  }
  return em.model;
}

TissueMixtureModel obtain_model(const PipelineConfig& cfg, const ProbabilisticAtlas& atlas,
                                KeyValues& report) {
  if (!cfg.model.empty()) return load_model(cfg.model);
  std::string trace;
  TissueMixtureModel model = fit_on_atlas(cfg, atlas, report, &trace);
  save_model(model, cfg.output_dir / "model.txt");
  write_file_atomic(cfg.output_dir / "fit_log.txt", trace);
  return model;
}

struct GbbmStage {
  NormalizedVolume patient;
  GbbmResult gbbm;
};

GbbmStage gbbm_stage(const PipelineConfig& cfg, const ProbabilisticAtlas& atlas,
                     const TissueMixtureModel& model, const ScalarVolume& raw, KeyValues& report) {
  require_same_grid(raw.grid(), atlas.grid(), "patient vs atlas");
  GbbmStage out{normalize_intensity(raw, atlas.brain_mask), {}};
  out.gbbm = build_gbbm(out.patient.volume, atlas, model, cfg.gbbm);
  report.set("normalization_mean", out.patient.record.mean);
  report.set("degenerate_voxels", out.gbbm.degenerate_voxels);
  write_volume(out.gbbm.map, cfg.output_dir / "gbbm.mvol");
  return out;
}

struct SegmentStage {
  BinaryMask mask;
  EvolutionResult evolution;
};

SegmentStage segment_stage(const PipelineConfig& cfg, const ScalarVolume& patient,
                           const CandidateRegion& region, KeyValues& report) {
  ForceContext ctx = make_force_context(patient, region, cfg.edge_sigma, cfg.edge_weight);
  LevelSetField ls = signed_distance_init(region.mask, cfg.band_halfwidth);
  std::ostringstream log;
  auto observer = [&log](const IterationStats& s) {
    log << "iteration=" << s.iteration << " inside_voxels=" << s.inside_voxels
        << " max_update=" << format_real(s.max_update)
        << " interface_voxels=" << s.interface_voxels
        << " cos_mean=" << format_real(s.cos_mean) << " cos_min=" << format_real(s.cos_min)
        << " cos_max=" << format_real(s.cos_max) << " reinitialized=" << (s.reinitialized ? 1 : 0)
        << '\n';
  };
  SegmentStage out{{}, evolve(ls, ctx, cfg.evolution, observer)};
  out.mask = zero_level_mask(out.evolution.field);
  write_file_atomic(cfg.output_dir / "fvf_log.txt", log.str());
  write_volume(out.mask, cfg.output_dir / "segmentation.mvol");
  report.set("iterations", out.evolution.field.iteration);
  report.set("converged", out.evolution.converged ? 1 : 0);
  report.set("dt", out.evolution.dt);
  report.set("segmentation_voxels", out.mask.count());
  return out;
}

void append(KeyValues& into, const KeyValues& from) {
  for (const auto& [k, v] : from.entries()) into.set(k, v);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  require(it != setters().end(), ErrorCode::Config, "unknown configuration key '" + key + "'");
  it->second(*this, key, value);
}

PipelineConfig PipelineConfig::from_keyvalues(const KeyValues& kv) {
  PipelineConfig cfg;
  for (const auto& [k, v] : kv.entries()) cfg.set(k, v);
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return from_keyvalues(KeyValues::load(path));
}

KeyValues PipelineConfig::to_keyvalues() const {
  KeyValues kv;
  kv.set("input", input.string());
  kv.set("atlas_dir", atlas_dir.string());
  kv.set("model", model.string());
  kv.set("output_dir", output_dir.string());
  kv.set("ground_truth", ground_truth.string());
  kv.set("candidate", candidate.string());
  kv.set("seed", static_cast<long long>(seed));
  kv.set("phantom_size", phantom_size);
  kv.set("tumor_shape", tumor_shape);
  kv.set("tumor_offset", tumor_offset);
  kv.set("em_components", em.components);
  kv.set("em_tol", em.tol);
  kv.set("em_max_iters", em.max_iters);
  kv.set("em_max_samples", em_max_samples);
  kv.set("omega", gbbm.omega);
  const CandidateParams cp = effective_candidate_params();
  kv.set("psi", cp.psi);
  kv.set("strip_depth", cp.strip_depth);
  kv.set("erode_iters", cp.erode_iters);
  kv.set("dilate_iters", cp.dilate_iters);
  kv.set("connectivity", static_cast<int>(cp.connectivity));
  kv.set("alpha", evolution.alpha);
  kv.set("beta", evolution.beta);
  kv.set("dt", evolution.dt);
  kv.set("max_iters", evolution.max_iters);
  kv.set("reinit_every", evolution.reinit_every);
  kv.set("stop_tol", evolution.stop_tol);
  kv.set("band_halfwidth", band_halfwidth);
  kv.set("edge_sigma", edge_sigma);
  kv.set("edge_weight", edge_weight);
  return kv;
}

CandidateParams PipelineConfig::effective_candidate_params() const {
  CandidateParams cp = candidate_params;
  cp.omega = gbbm.omega;
  cp.psi = psi ? *psi : 0.6 * gbbm.omega;
  return cp;
}

void PipelineConfig::validate() const {
  require(gbbm.omega > 0.0 && std::isfinite(gbbm.omega), ErrorCode::InvalidParameter,
          "omega must be > 0");
  effective_candidate_params().validate();
  evolution.validate();
  require(em.components == 3, ErrorCode::InvalidParameter,
          "the Bayesian map needs exactly three tissue components (em_components=3)");
  require(em.tol >= 0.0 && em.max_iters >= 1, ErrorCode::InvalidParameter,
          "em_tol must be >= 0 and em_max_iters >= 1");
  require(band_halfwidth > 0.0, ErrorCode::InvalidParameter, "band_halfwidth must be > 0");
  require(edge_sigma > 0.0, ErrorCode::InvalidParameter, "edge_sigma must be > 0");
  require(edge_weight >= 0.0 && std::isfinite(edge_weight), ErrorCode::InvalidParameter,
          "edge_weight must be >= 0");
  require(phantom_size >= 32, ErrorCode::InvalidParameter, "phantom_size must be >= 32");
  tumor_shape_from_string(tumor_shape);
}

ProbabilisticAtlas load_atlas(const fs::path& dir) {
  require_path(dir, "atlas_dir");
  ProbabilisticAtlas a;
  a.template_image = read_scalar(dir / "template.mvol");
  a.csf = read_scalar(dir / "csf.mvol");
  a.gm = read_scalar(dir / "gm.mvol");
  a.wm = read_scalar(dir / "wm.mvol");
  a.brain_mask = read_mask(dir / "brain_mask.mvol");
  a.validate();
  return a;
}

void save_atlas(const ProbabilisticAtlas& atlas, const fs::path& dir) {
  ensure_output_dir(dir);
  write_volume(atlas.template_image, dir / "template.mvol");
  write_volume(atlas.csf, dir / "csf.mvol");
  write_volume(atlas.gm, dir / "gm.mvol");
  write_volume(atlas.wm, dir / "wm.mvol");
  write_volume(atlas.brain_mask, dir / "brain_mask.mvol");
}

KeyValues run_phantom(const PipelineConfig& cfg) {
  return in_stage("phantom", [&] {
    cfg.validate();
    ensure_output_dir(cfg.output_dir);
    const int n = cfg.phantom_size;
    const PhantomAtlas pa = synth_atlas({n, n, n}, cfg.seed);
    TumorSpec tumor = default_tumor(pa, tumor_shape_from_string(cfg.tumor_shape));
    tumor.offset_sigma = cfg.tumor_offset;
    tumor.seed = cfg.seed;
    const PatientVolume patient = synth_patient(pa, tumor);

    save_atlas(pa.atlas, cfg.output_dir / "atlas");
    write_volume(patient.image, cfg.output_dir / "patient.mvol");
    write_volume(patient.truth, cfg.output_dir / "truth.mvol");
    KeyValues manifest = pa.manifest();
    append(manifest, tumor.manifest());
    manifest.set("truth_voxels", patient.truth.count());
    manifest.save(cfg.output_dir / "phantom_manifest.txt");
    return manifest;
  });
}

KeyValues run_fit(const PipelineConfig& cfg) {
  return in_stage("fit", [&] {
    cfg.validate();
    ensure_output_dir(cfg.output_dir);
    const ProbabilisticAtlas atlas = load_atlas(cfg.atlas_dir);
    KeyValues report;
    std::string trace;
    const TissueMixtureModel model = fit_on_atlas(cfg, atlas, report, &trace);
    save_model(model, cfg.output_dir / "model.txt");
    write_file_atomic(cfg.output_dir / "fit_log.txt", trace);
    append(report, model.to_keyvalues());
    return report;
  });
}

KeyValues run_gbbm(const PipelineConfig& cfg) {
  return in_stage("gbbm", [&] {
    cfg.validate();
    ensure_output_dir(cfg.output_dir);
    require_path(cfg.input, "input");
    const ProbabilisticAtlas atlas = load_atlas(cfg.atlas_dir);
    const ScalarVolume raw = read_scalar(cfg.input);
    KeyValues report;
    const TissueMixtureModel model = obtain_model(cfg, atlas, report);
    gbbm_stage(cfg, atlas, model, raw, report);
    return report;
  });
}

KeyValues run_candidate(const PipelineConfig& cfg) {
  return in_stage("candidate", [&] {
    cfg.validate();
    ensure_output_dir(cfg.output_dir);
    require_path(cfg.input, "input");
    const ScalarVolume gbbm = read_scalar(cfg.input);
    const ProbabilisticAtlas atlas = load_atlas(cfg.atlas_dir);
    require_same_grid(gbbm.grid(), atlas.grid(), "gbbm vs atlas");
    const CandidateRegion region =
        extract_candidate(gbbm, atlas.brain_mask, cfg.effective_candidate_params());
    write_volume(region.mask, cfg.output_dir / "candidate.mvol");
    KeyValues report = region.report();
    report.save(cfg.output_dir / "candidate_report.txt");
    return report;
  });
}

KeyValues run_segment(const PipelineConfig& cfg) {
  return in_stage("segment", [&] {
    cfg.validate();
    ensure_output_dir(cfg.output_dir);
    require_path(cfg.input, "input");
    const ScalarVolume raw = read_scalar(cfg.input);
    const fs::path cand_path =
        cfg.candidate.empty() ? cfg.output_dir / "candidate.mvol" : cfg.candidate;
    CandidateRegion region;
    region.mask = read_mask(cand_path);
    require_same_grid(raw.grid(), region.mask.grid(), "patient vs candidate");
    region.voxel_count = region.mask.count();
    if (region.voxel_count == 0) throw NoCandidateError(0, "candidate mask is empty");
    region.centroid = mask_centroid(region.mask);
    // The edge map is scale-free, so normalizing by the brain mean is not
    // needed here; use the atlas mask when one is given for consistency.
    ScalarVolume patient = raw;
    if (!cfg.atlas_dir.empty()) {
      const ProbabilisticAtlas atlas = load_atlas(cfg.atlas_dir);
      require_same_grid(raw.grid(), atlas.grid(), "patient vs atlas");
      patient = normalize_intensity(raw, atlas.brain_mask).volume;
    }
    KeyValues report;
    report.set("candidate_voxels", region.voxel_count);
    segment_stage(cfg, patient, region, report);
    return report;
  });
}

KeyValues run_evaluate(const PipelineConfig& cfg) {
  return in_stage("evaluate", [&] {
    require_path(cfg.input, "input");
    require_path(cfg.ground_truth, "ground_truth");
    const BinaryMask result = read_mask(cfg.input);
    const BinaryMask truth = read_mask(cfg.ground_truth);
    return tanimoto(result, truth).to_keyvalues();
  });
}

KeyValues run_pipeline(const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  KeyValues report;
  in_stage("config", [&] {
    cfg.validate();
    require_path(cfg.input, "input");
    ensure_output_dir(cfg.output_dir);
  });

  const ProbabilisticAtlas atlas = in_stage("atlas", [&] { return load_atlas(cfg.atlas_dir); });
  const ScalarVolume raw = in_stage("input", [&] { return read_scalar(cfg.input); });
  std::optional<BinaryMask> truth;
  if (!cfg.ground_truth.empty()) {
    truth = in_stage("ground-truth", [&] {
      BinaryMask t = read_mask(cfg.ground_truth);
      require_same_grid(t.grid(), raw.grid(), "ground truth vs patient");
      return t;
    });
  }

  KeyValues stage_kv;
  const TissueMixtureModel model =
      in_stage("fit", [&] { return obtain_model(cfg, atlas, stage_kv); });
  const GbbmStage g = in_stage("gbbm", [&] { return gbbm_stage(cfg, atlas, model, raw, stage_kv); });

  std::optional<CandidateRegion> region;
  int failed_step = 0;
  in_stage("candidate", [&] {
    try {
      region = extract_candidate(g.gbbm.map, atlas.brain_mask, cfg.effective_candidate_params());
    } catch (const NoCandidateError& e) {
      failed_step = e.step();
    }
  });

  BinaryMask segmentation(raw.grid());
  if (region) {
    write_volume(region->mask, cfg.output_dir / "candidate.mvol");
    region->report().save(cfg.output_dir / "candidate_report.txt");
    const SegmentStage s =
        in_stage("segment", [&] { return segment_stage(cfg, g.patient.volume, *region, stage_kv); });
    segmentation = s.mask;
    report.set("status", "ok");
  } else {
    report.set("status", "no_candidate");
    report.set("no_candidate_step", failed_step);
    stage_kv.set("iterations", 0);
    write_volume(BinaryMask(raw.grid()), cfg.output_dir / "candidate.mvol");
    write_volume(segmentation, cfg.output_dir / "segmentation.mvol");
  }

  if (truth) append(report, tanimoto(segmentation, *truth).to_keyvalues());
  report.set("candidate_voxels", region ? region->voxel_count : std::size_t{0});
  append(report, stage_kv);
  report.set("runtime_seconds", seconds_since(t0));
  in_stage("report", [&] { report.save(cfg.output_dir / "report.txt"); });
  return report;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::Format:
    case ErrorCode::Truncation:
    case ErrorCode::UnsupportedDtype:
      return kExitIo;
    case ErrorCode::NoCandidate:
      return kExitNoCandidate;
    case ErrorCode::NumericalInstability:
    case ErrorCode::Numerical:
      return kExitInstability;
    case ErrorCode::Config:
    case ErrorCode::InvalidParameter:
      return kExitUsage;
    case ErrorCode::EmptyRegion:
    case ErrorCode::Range:
    case ErrorCode::Grid:
    case ErrorCode::Normalization:
    case ErrorCode::InsufficientData:
      return kExitData;
  }
  return kExitFailure;
}

}  // namespace fvfseg
