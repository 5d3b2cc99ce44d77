#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fvfseg/brainmap.hpp"
#include "fvfseg/candidate.hpp"
#include "fvfseg/keyvalue.hpp"
#include "fvfseg/levelset.hpp"
#include "fvfseg/ngmm.hpp"

namespace fvfseg {

/// Every tunable of the pipeline plus the file locations. Parsed from a flat
/// key=value file; unknown keys are rejected.
struct PipelineConfig {
  std::filesystem::path input;         // patient volume (or stage-specific input)
  std::filesystem::path atlas_dir;     // template/csf/gm/wm/brain_mask .mvol
  std::filesystem::path model;         // serialized mixture model; fitted when empty
  std::filesystem::path output_dir{"."};
  std::filesystem::path ground_truth;  // optional
  std::filesystem::path candidate;     // segment: candidate mask, default <output_dir>/candidate.mvol

  std::uint64_t seed = 1;

  // phantom generation
  int phantom_size = 64;
  std::string tumor_shape = "sphere";
  double tumor_offset = 4.0;

  EmOptions em;
  std::size_t em_max_samples = 2'000'000;
  GbbmParams gbbm;
  std::optional<double> psi;  // defaults to 0.6 * omega
  CandidateParams candidate_params;
  EvolutionParams evolution;
  double band_halfwidth = 6.0;
  double edge_sigma = 1.0;
  double edge_weight = 20.0;

  /// Sets one key; Config error for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  static PipelineConfig from_keyvalues(const KeyValues& kv);
  static PipelineConfig load(const std::filesystem::path& path);
  KeyValues to_keyvalues() const;

  CandidateParams effective_candidate_params() const;
  void validate() const;
};

/// Files an atlas directory is expected to contain.
ProbabilisticAtlas load_atlas(const std::filesystem::path& dir);
void save_atlas(const ProbabilisticAtlas& atlas, const std::filesystem::path& dir);

// Stage entry points. Each reads its inputs from the config, writes its
// artifacts under output_dir and returns the key=value report it printed to
// the report file (when it has one). Errors are rethrown with the stage name
// prepended and their original code kept.
KeyValues run_phantom(const PipelineConfig& cfg);
KeyValues run_fit(const PipelineConfig& cfg);
KeyValues run_gbbm(const PipelineConfig& cfg);
KeyValues run_candidate(const PipelineConfig& cfg);
KeyValues run_segment(const PipelineConfig& cfg);
KeyValues run_evaluate(const PipelineConfig& cfg);

/// fit (or load) -> normalize -> GBBM -> candidate -> FVF -> Tanimoto.
/// A missing candidate is not an exception here: the report carries
/// status=no_candidate, an empty segmentation is written and the caller maps
/// the status to its exit code.
KeyValues run_pipeline(const PipelineConfig& cfg);

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNoCandidate = 4,
  kExitInstability = 5,
  kExitData = 6,
};

int exit_code_for(ErrorCode code);

}  // namespace fvfseg
