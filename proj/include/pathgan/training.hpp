#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathgan/image.hpp"
#include "pathgan/nn/model.hpp"
#include "pathgan/nn/rmsprop.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

struct TrainConfig {
  std::string dataset_dir;
  std::string out_dir;
  GeometryKind geometry = GeometryKind::Planar;
  int image_width = 64;
  int image_height = 64;
  ModelConfig model;
  RmspropConfig opt;

  int bootstrap_epochs = 5;   // content-loss-only warmup
  int iterations = 300;       // adversarial iterations
  int d_updates = 16;         // discriminator gradient updates per iteration
  int g_updates = 8;          // generator gradient updates per iteration
  int minibatch = 16;         // scanpaths per gradient update
  // Largest per-step adjoint the discriminator may feed back into the
  // generator. The path back through two recurrent stacks multiplies several
  // normalizer gains, so raw adversarial adjoints dwarf the content ones and
  // an unlucky stretch of updates can undo the bootstrap.
  double adv_grad_cap = 0.1;
  double split = 0.8;         // training fraction of images
  std::uint64_t seed = 1;
  int val_every = 50;         // validation cadence, in iterations
  int val_k = 0;              // rollouts per validation image (0 = content loss only)
  int ckpt_every = 1;         // checkpoints every N validations

  static TrainConfig from_map(const std::map<std::string, std::string>& kv);
  static TrainConfig from_file(const std::string& path);
  void validate() const;
};

struct TrainLogRow {
  long long iteration = 0;  // adversarial iteration (epoch index for bootstrap rows)
  std::string phase;        // "val" | "bootstrap" | "adv"
  double content_loss = std::numeric_limits<double>::quiet_NaN();
  double d_loss = std::numeric_limits<double>::quiet_NaN();
  double g_loss = std::numeric_limits<double>::quiet_NaN();
  double d_acc_real = std::numeric_limits<double>::quiet_NaN();
  double d_acc_fake = std::numeric_limits<double>::quiet_NaN();
  double val_jarodzka = std::numeric_limits<double>::quiet_NaN();
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  std::string to_csv() const;
};

// Raw, possibly pixel-coordinate dataset as loaded from disk.
struct RawDataset {
  std::vector<std::string> image_ids;
  std::vector<Image> images;  // pixel values in [0,1]
  std::vector<Scanpath> scanpaths;
  bool pixel_coords = false;  // fixations in pixels rather than [0,1]
  std::map<std::string, SaliencyMap> saliency;
};

// <dir>/images/*.pgm (+ optional <dir>/saliency/*.pgm) and
// <dir>/scanpaths.jsonl
RawDataset load_raw_dataset(const std::string& dir);

struct PreparedDataset {
  std::vector<std::string> image_ids;
  std::vector<Image> images;  // resized, mean-subtracted
  std::array<double, 3> mean_pixel = {0, 0, 0};
  std::vector<int> train_images, val_images;
  std::vector<std::pair<int, Scanpath>> train, val;  // (image index, validated path)
};

// Resize to the configured dims, split by image, subtract the training-split
// mean pixel everywhere, normalize pixel-coordinate fixations against the
// original image dims.
PreparedDataset preprocess(const RawDataset& raw, const TrainConfig& cfg);

// One training run. All randomness is derived from (seed, phase, counters),
// so a resumed session continues exactly where the checkpoint stopped.
class TrainSession {
 public:
  explicit TrainSession(const TrainConfig& cfg);
  TrainSession(const TrainConfig& cfg, const ParamStore& checkpoint);

  // Runs the full remaining schedule (initial validation, bootstrap,
  // adversarial iterations with periodic validation), writes the log and the
  // final checkpoint when out_dir is set.
  void run();

  void bootstrap_phase();        // remaining bootstrap epochs
  void adversarial_iteration();  // one iteration of d_updates + g_updates
  TrainLogRow validation_pass();

  double validation_content_loss();  // deterministic (Frozen) mean over the val split

  const TrainConfig& config() const { return cfg_; }
  const TrainLog& log() const { return log_; }
  PathganModel& model() { return model_; }
  const PreparedDataset& data() const { return data_; }
  const Rmsprop& opt_g() const { return opt_g_; }
  const Rmsprop& opt_d() const { return opt_d_; }
  int bootstrap_epochs_done() const { return bootstrap_done_; }
  long long iterations_done() const { return iters_done_; }
  std::string final_checkpoint_path() const;

  ParamStore export_checkpoint() const;

 private:
  void warmup_norm_stats();
  void bootstrap_epoch(int epoch);
  std::vector<int> sample_batch(Rng& rng) const;

  TrainConfig cfg_;
  PreparedDataset data_;
  PathganModel model_;
  Rmsprop opt_g_, opt_d_;
  TrainLog log_;
  int bootstrap_done_ = 0;
  long long iters_done_ = 0;
};

// Rebuilds a model (plus preprocessing constants) from a checkpoint, for
// generation and evaluation outside a training session.
struct LoadedModel {
  ModelConfig cfg;
  PathganModel model;
  std::array<double, 3> mean_pixel = {0, 0, 0};
  int image_width = 0;
  int image_height = 0;
  std::uint64_t seed = 0;
};

LoadedModel load_model_checkpoint(const std::string& path);

// K seeded rollouts for one preprocessed image.
std::vector<Scanpath> generate_scanpaths(const PathganModel& model, const Image& img,
                                         const std::string& image_id, int k, std::uint64_t seed);

}  // namespace pathgan
