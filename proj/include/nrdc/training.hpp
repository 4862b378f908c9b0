#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "nrdc/checkpoint.hpp"
#include "nrdc/model.hpp"

namespace nrdc {
namespace training {

enum class Module { inter_codec, menet, motion_codec, fe_and_proj, mask_gen };
enum class Objective { MOTION_COMP, FULL_RD };

struct TrainPhaseSpec {
    int step = 0;  // 1..7
    std::set<Module> trainable;
    Objective objective = Objective::FULL_RD;
    int num_frames = 3;
    int epochs = 1;
    bool epa = false;
};

// The 7-row schedule; mask_gen appears in the trainable sets only for MCR.
std::vector<TrainPhaseSpec> phase_table(CodingMode mode);

// Registry prefixes owned by a module ("inter." + "refine." for the
// inter-frame codec, which spans G_enc/G_dec, refinement net and frame
// generator).
std::vector<std::string> module_prefixes(Module m);
std::vector<std::string> trainable_prefixes(const std::set<Module>& mods);

struct DatasetSpec {
    int patch = 64;        // square clip size, multiple of 64
    int clips = 8;         // distinct synthetic clips per epoch cycle
    double max_shift = 2.0;  // pixels/frame
    double noise_sigma = 0.01;
};

struct TrainConfig {
    CodecConfig codec;  // carries mode, C, lambda, seed
    int batch_size = 4;
    double learning_rate = 1e-4;
    double epa_learning_rate = 1e-5;
    int iters_per_epoch = 8;  // desk-scale "epoch"
    DatasetSpec data;
    std::string init_checkpoint;  // required for CR/MCR
    std::string out_dir;
    bool quiet = false;
};

// MOTION_COMP: R_motion(bpp) + lambda * mse(x_t, pixel predictor);
// FULL_RD:     R_total(bpp)  + lambda * mse(x_t, reconstruction).
Var compute_loss(Objective objective, const TrainFrameResult& coded, const Var& x_t, double lambda,
                 int height, int width);

// Codes frames 1..num_frames-1 against the running reconstruction; with
// epa the cascade stays differentiable end to end, otherwise each
// reference is detached. Returns the mean per-frame loss.
Var rollout_loss(const CodecModel& model, const std::vector<Var>& clip, int num_frames,
                 Objective objective, bool epa, double lambda, std::mt19937_64& rng,
                 double* rate_out = nullptr, double* dist_out = nullptr);
Var epa_rollout(const CodecModel& model, const std::vector<Var>& clip, int num_frames, double lambda,
                std::mt19937_64& rng);

// Deterministic synthetic clip sampler (seed-to-sample mapping).
std::vector<Var> sample_clip(const DatasetSpec& data, int num_frames, std::uint64_t seed);

// Self-supervised warm-up of the motion path (flow net + motion codec) on
// synthetic global shifts; not part of the Table-1 schedule.
void warmup_motion(CodecModel& model, const TrainConfig& cfg, int iters);

struct StepResult {
    int step = 0;
    double final_loss = 0;
    std::string checkpoint_path;
};

struct ScheduleResult {
    std::vector<StepResult> steps;
    std::string curve_csv_path;
};

// Runs the schedule (CC starts at step 2: the step-1 objective needs the
// pixel predictor that only CR/MCR have). Emits a checkpoint per step.
ScheduleResult run_schedule(CodecModel& model, const TrainConfig& cfg);

double validation_loss(const CodecModel& model, const TrainConfig& cfg, int clips = 4);

}  // namespace training
}  // namespace nrdc
