// mixforge - build and validate realistic two-speaker mixture corpora.
//
// Subcommands: plan, build, validate, sweep, separate, show-config,
// make-toy-corpus. See README.md for a worked end-to-end example.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mixforge/channel.hpp"
#include "mixforge/errors.hpp"
#include "mixforge/evaluation.hpp"
#include "mixforge/gmm.hpp"
#include "mixforge/masks.hpp"
#include "mixforge/metrics.hpp"
#include "mixforge/pipeline.hpp"
#include "mixforge/planner.hpp"
#include "mixforge/toycorpus.hpp"
#include "mixforge/util.hpp"

namespace fs = std::filesystem;
using namespace mixforge;

namespace {

// Channel settings shared by build and sweep. Precedence: explicit flags >
// config file > defaults.
struct ChannelFlags {
  std::string config_path;
  std::optional<double> mic_distance;
  std::optional<double> source_spacing;
  std::optional<double> rt60;
  std::optional<double> noise_snr;
  std::optional<double> noise_floor;
  std::optional<double> nonlinearity_drive;
  std::optional<uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--channel-config", config_path, "key = value channel config file");
    cmd->add_option("--mic-distance", mic_distance, "mic distance in meters");
    cmd->add_option("--source-spacing", source_spacing, "left/right source spacing in meters");
    cmd->add_option("--rt60", rt60, "reverberation time to -60 dB, seconds");
    cmd->add_option("--noise-snr", noise_snr, "noise SNR in dB re the clean wet signal");
    cmd->add_option("--noise-floor", noise_floor, "absolute noise floor in dBFS (overrides --noise-snr)");
    cmd->add_option("--nonlinearity-drive", nonlinearity_drive, "cubic soft-clip drive, 0 = off");
    cmd->add_option("--channel-seed", seed, "channel/noise seed");
  }

  ChannelModel resolve(int rate) const {
    ChannelModel model;
    if (!config_path.empty()) model = load_channel_config(config_path);
    model.sample_rate = rate;
    if (mic_distance) model.mic_distance_m = *mic_distance;
    if (source_spacing) model.source_spacing_m = *source_spacing;
    if (rt60) model.reverb_rt60_s = *rt60;
    if (noise_snr) model.noise_snr_db = *noise_snr;
    if (noise_floor) model.noise_floor_dbfs = *noise_floor;
    if (nonlinearity_drive) model.nonlinearity_drive = *nonlinearity_drive;
    if (seed) model.seed = *seed;
    return model;
  }
};

std::vector<MaskKind> parse_mask_list(const std::string& csv) {
  std::vector<MaskKind> kinds;
  for (const std::string& item : split(csv, ','))
    if (!trim(item).empty()) kinds.push_back(mask_kind_from_name(std::string(trim(item))));
  if (kinds.empty()) throw InvalidArgument("no mask kinds given");
  return kinds;
}

std::vector<double> parse_distance_list(const std::string& csv) {
  std::vector<double> out;
  for (const std::string& item : split(csv, ',')) {
    const std::string t{trim(item)};
    if (t.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
      throw InvalidArgument("bad distance value: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_plan(const std::string& corpus_dir, const std::string& out, int count, double hours,
             uint64_t seed, double max_len_ratio, int max_uses, double gain_jitter, int rate) {
  if (!fs::is_directory(corpus_dir))
    throw IoError("corpus directory not found: " + corpus_dir);
  const std::vector<SourceFile> files = scan_corpus(corpus_dir, rate);

  if (count <= 0) {
    if (hours <= 0.0) throw InvalidArgument("give --count or --hours");
    double mean_samples = 0.0;
    for (const SourceFile& f : files) mean_samples += static_cast<double>(f.duration);
    mean_samples /= static_cast<double>(files.size());
    count = static_cast<int>(std::ceil(hours * 3600.0 * rate / mean_samples));
  }

  PlannerOptions opts;
  opts.count = count;
  opts.seed = seed;
  opts.max_len_ratio = max_len_ratio;
  opts.max_uses_per_speaker = max_uses;
  opts.gain_jitter_db = gain_jitter;
  const MixturePlan plan = build_mixture_list(files, opts);
  save_plan(plan, out);
  std::cout << "plan: " << plan.entries.size() << " entries over " << files.size()
            << " source files -> " << out << "\n";
  return 0;
}

int cmd_build(const std::string& plan_path, const std::string& out, const ChannelFlags& channel,
              const std::string& session_spec, bool synthetic, int max_attempts, int jobs,
              int rate) {
  const MixturePlan plan = load_plan(plan_path);
  BuildOptions opts;
  opts.max_attempts = max_attempts;
  opts.working_rate = rate;
  opts.jobs = jobs;

  DatasetManifest manifest;
  if (synthetic) {
    manifest = build_dataset_synthetic(plan, out, opts);
  } else if (session_spec.rfind("fake", 0) == 0) {
    const size_t colon = session_spec.find(':');
    const std::string schedule = colon == std::string::npos ? "" : session_spec.substr(colon + 1);
    auto session = fake_session(parse_fault_schedule(schedule));
    manifest = build_dataset(plan, *session, out, opts);
  } else if (session_spec == "sim") {
    manifest = build_dataset_simulated(plan, channel.resolve(rate), out, opts);
  } else {
    throw InvalidArgument("unknown --session '" + session_spec + "' (expected sim or fake[:schedule])");
  }

  int ok = 0;
  for (const ManifestEntry& e : manifest.entries)
    if (e.ok) ++ok;
  std::cout << "build: " << ok << "/" << manifest.entries.size() << " entries ok -> " << out
            << "\n";
  return ok == static_cast<int>(manifest.entries.size()) ? 0 : 2;
}

int cmd_validate(const std::string& dataset, const std::string& masks_csv, bool baseline,
                 const std::string& pesq_cmd, const std::string& out, int jobs) {
  EvalOptions opts;
  opts.kinds = parse_mask_list(masks_csv);
  opts.include_baseline = baseline;
  if (!pesq_cmd.empty()) opts.pesq_cmd = pesq_cmd;
  opts.jobs = jobs;
  const std::vector<ValidationRow> rows = validate_dataset(dataset, opts);
  write_validation_csv(rows, out);

  if (baseline)
    std::cout << "none: mean si_sdr " << fmt_f6(mean_si_sdr(rows, "none")) << " dB\n";
  for (MaskKind kind : opts.kinds) {
    const std::string name = mask_kind_name(kind);
    std::cout << name << ": mean si_sdr " << fmt_f6(mean_si_sdr(rows, name)) << " dB";
    const std::optional<double> mp = mean_pesq(rows, name);
    if (mp) std::cout << ", mean pesq " << fmt_f6(*mp);
    std::cout << "\n";
  }
  std::cout << "validate: " << rows.size() << " rows -> " << out << "\n";
  return 0;
}

int cmd_sweep(const std::string& plan_path, const std::string& distances_csv,
              const std::string& masks_csv, const ChannelFlags& channel,
              const std::string& workdir, const std::string& out, const std::string& pesq_cmd,
              int max_attempts, int jobs, int rate) {
  const MixturePlan plan = load_plan(plan_path);
  SweepOptions opts;
  opts.distances_m = parse_distance_list(distances_csv);
  opts.kinds = parse_mask_list(masks_csv);
  opts.base_model = channel.resolve(rate);
  opts.workdir = workdir.empty() ? fs::path(out + ".work") : fs::path(workdir);
  if (!pesq_cmd.empty()) opts.pesq_cmd = pesq_cmd;
  opts.jobs = jobs;
  opts.max_attempts = max_attempts;
  opts.working_rate = rate;

  const std::vector<SweepRow> rows = run_sweep(plan, opts);
  write_sweep_csv(rows, out);
  for (const SweepRow& r : rows)
    std::cout << r.mask << " @ " << fmt_f6(r.distance_m) << " m: mean si_sdr "
              << fmt_f6(r.mean_si_sdr_db) << " dB (baseline "
              << fmt_f6(r.mean_unprocessed_si_sdr_db) << " dB, n=" << r.n_mixtures << ")\n";
  std::cout << "sweep: " << rows.size() << " rows -> " << out << "\n";
  return 0;
}

int cmd_separate(const std::string& in, const std::string& out1, const std::string& out2,
                 uint64_t seed, double salience_db, int rate) {
  AudioClip mix = read_wav(in);
  if (mix.sample_rate != rate) mix = resample(mix, rate);
  SeparateOptions opts;
  opts.seed = seed;
  opts.salience_db = salience_db;
  auto [est1, est2] = separate_gmm(mix, opts);
  write_wav(est1, out1);
  write_wav(est2, out2);
  std::cout << "separate: " << in << " -> " << out1 << ", " << out2 << "\n";
  return 0;
}

int cmd_show_config(const ChannelFlags& channel, int rate) {
  const ChannelModel model = channel.resolve(rate);
  const StftConfig stft_cfg = StftConfig::for_rate(rate);
  const PlannerOptions planner;
  const BuildOptions build;
  const SeparateOptions separate;

  std::cout << "working_rate = " << rate << "\n";
  std::cout << "stft.frame_len = " << stft_cfg.frame_len << "\n";
  std::cout << "stft.hop = " << stft_cfg.hop << "\n";
  std::cout << "stft.window = hann\n";
  std::cout << "planner.max_len_ratio = " << fmt_f6(planner.max_len_ratio) << "\n";
  std::cout << "planner.max_uses_per_speaker = " << planner.max_uses_per_speaker << "\n";
  std::cout << "planner.gain_jitter_db = " << fmt_f6(planner.gain_jitter_db) << "\n";
  std::cout << "build.max_attempts = " << build.max_attempts << "\n";
  std::cout << "build.peak_target = " << fmt_f6(build.peak_target) << "\n";
  std::cout << "channel.mic_distance_m = " << fmt_f6(model.mic_distance_m) << "\n";
  std::cout << "channel.source_spacing_m = " << fmt_f6(model.source_spacing_m) << "\n";
  std::cout << "channel.reverb_rt60_s = " << fmt_f6(model.reverb_rt60_s) << "\n";
  std::cout << "channel.noise_snr_db = "
            << (model.noise_snr_db ? fmt_f6(*model.noise_snr_db) : "off") << "\n";
  std::cout << "channel.noise_floor_dbfs = "
            << (model.noise_floor_dbfs ? fmt_f6(*model.noise_floor_dbfs) : "off") << "\n";
  std::cout << "channel.nonlinearity_drive = " << fmt_f6(model.nonlinearity_drive) << "\n";
  std::cout << "channel.speed_of_sound = " << fmt_f6(model.speed_of_sound) << "\n";
  std::cout << "channel.seed = " << model.seed << "\n";
  std::cout << "separate.log_floor_db = " << fmt_f6(separate.log_floor_db) << "\n";
  std::cout << "separate.salience_db = " << fmt_f6(separate.salience_db) << "\n";
  std::cout << "separate.restarts = " << separate.restarts << "\n";
  std::cout << "separate.em.tol = " << separate.em.tol << "\n";
  std::cout << "separate.em.max_iter = " << separate.em.max_iter << "\n";
  return 0;
}

int cmd_make_toy_corpus(const std::string& out, int dialects, int speakers, int sentences,
                        double min_dur, double max_dur, int rate, uint64_t seed) {
  ToyCorpusOptions opts;
  opts.dialects = dialects;
  opts.speakers_per_dialect = speakers;
  opts.sentences_per_speaker = sentences;
  opts.min_duration_s = min_dur;
  opts.max_duration_s = max_dur;
  opts.sample_rate = rate;
  opts.seed = seed;
  make_toy_corpus(out, opts);
  std::cout << "toy corpus: " << dialects * speakers << " speakers x " << sentences
            << " sentences -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixforge: realistic two-speaker mixture corpora with ground truths"};
  app.require_subcommand(1);
  int rate = kWorkingRate;
  app.add_option("--rate", rate, "working sample rate in Hz")->capture_default_str();

  // plan
  auto* plan = app.add_subcommand("plan", "scan a corpus tree and build a mixture plan");
  std::string plan_corpus, plan_out;
  int plan_count = 0;
  double plan_hours = 0.0;
  uint64_t plan_seed = 0;
  double plan_ratio = 1.5, plan_jitter = 0.0;
  int plan_uses = 4;
  plan->add_option("--corpus-dir", plan_corpus, "corpus root: <dialect>/<speaker>/<sentence>.wav")
      ->required();
  plan->add_option("--out", plan_out, "plan file to write")->required();
  plan->add_option("--count", plan_count, "number of mixtures");
  plan->add_option("--hours", plan_hours, "target corpus hours (converted via mean file duration)");
  plan->add_option("--seed", plan_seed, "plan seed");
  plan->add_option("--max-len-ratio", plan_ratio, "max duration ratio within a pair")
      ->capture_default_str();
  plan->add_option("--max-uses-per-speaker", plan_uses, "per-speaker usage cap")
      ->capture_default_str();
  plan->add_option("--gain-jitter", plan_jitter, "uniform per-entry gain jitter in dB")
      ->capture_default_str();

  // build
  auto* build = app.add_subcommand("build", "record GTS and RealMix folders from a plan");
  std::string build_plan, build_out, build_session = "sim";
  ChannelFlags build_channel;
  bool build_synthetic = false;
  int build_attempts = 5, build_jobs = 1;
  build->add_option("--plan", build_plan, "plan file")->required();
  build->add_option("--out", build_out, "dataset output directory")->required();
  build->add_option("--session", build_session, "sim | fake[:o@1,u@3[=lost]]")
      ->capture_default_str();
  build->add_flag("--synthetic", build_synthetic,
                  "store instantaneous digital sums instead of channel recordings");
  build->add_option("--max-attempts", build_attempts, "retry budget per recording")
      ->capture_default_str();
  build->add_option("--jobs", build_jobs, "parallel entries (simulator only)")
      ->capture_default_str();
  build_channel.add_to(build);

  // validate
  auto* validate = app.add_subcommand("validate", "score ground-truth quality with ideal masks");
  std::string val_dataset, val_masks = "wfm,irm,ibm", val_pesq, val_out;
  bool val_baseline = false;
  int val_jobs = 1;
  validate->add_option("--dataset", val_dataset, "dataset directory (with manifest.tsv)")
      ->required();
  validate->add_option("--mask", val_masks, "comma list of ibm,irm,wfm")->capture_default_str();
  validate->add_flag("--baseline", val_baseline, "also score the unprocessed mixture (mask 'none')");
  validate->add_option("--pesq-cmd", val_pesq, "external PESQ template with {ref} and {deg}");
  validate->add_option("--out", val_out, "CSV report path")->required();
  validate->add_option("--jobs", val_jobs, "parallel mixtures")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "rebuild and validate across mic distances");
  std::string sweep_plan, sweep_distances = "0.5,1,1.5,2,2.5,3", sweep_masks = "wfm";
  std::string sweep_workdir, sweep_out, sweep_pesq;
  ChannelFlags sweep_channel;
  int sweep_attempts = 5, sweep_jobs = 1;
  sweep->add_option("--plan", sweep_plan, "plan file")->required();
  sweep->add_option("--distances", sweep_distances, "comma list of mic distances in meters")
      ->capture_default_str();
  sweep->add_option("--mask", sweep_masks, "comma list of ibm,irm,wfm")->capture_default_str();
  sweep->add_option("--workdir", sweep_workdir, "where per-distance datasets go (default <out>.work)");
  sweep->add_option("--out", sweep_out, "sweep CSV path")->required();
  sweep->add_option("--pesq-cmd", sweep_pesq, "external PESQ template with {ref} and {deg}");
  sweep->add_option("--max-attempts", sweep_attempts, "retry budget per recording")
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "parallel entries")->capture_default_str();
  sweep_channel.add_to(sweep);

  // separate
  auto* separate = app.add_subcommand("separate", "GMM-cluster a mixture into two estimates");
  std::string sep_in, sep_out1, sep_out2;
  uint64_t sep_seed = 0;
  double sep_salience = SeparateOptions{}.salience_db;
  separate->add_option("--in", sep_in, "mixture wav")->required();
  separate->add_option("--out1", sep_out1, "first estimate wav")->required();
  separate->add_option("--out2", sep_out2, "second estimate wav")->required();
  separate->add_option("--seed", sep_seed, "clustering seed");
  separate->add_option("--salience-db", sep_salience, "fit threshold re max magnitude")
      ->capture_default_str();

  // show-config
  auto* show = app.add_subcommand("show-config", "print every effective default");
  ChannelFlags show_channel;
  show_channel.add_to(show);

  // make-toy-corpus
  auto* toy = app.add_subcommand("make-toy-corpus", "generate the bundled speech-like test corpus");
  std::string toy_out;
  int toy_dialects = 2, toy_speakers = 3, toy_sentences = 3, toy_rate = 16000;
  double toy_min = 2.0, toy_max = 3.0;
  uint64_t toy_seed = 1;
  toy->add_option("--out", toy_out, "corpus root to create")->required();
  toy->add_option("--dialects", toy_dialects, "dialect directories")->capture_default_str();
  toy->add_option("--speakers-per-dialect", toy_speakers, "speakers per dialect")
      ->capture_default_str();
  toy->add_option("--sentences-per-speaker", toy_sentences, "sentences per speaker")
      ->capture_default_str();
  toy->add_option("--min-dur", toy_min, "min sentence seconds")->capture_default_str();
  toy->add_option("--max-dur", toy_max, "max sentence seconds")->capture_default_str();
  toy->add_option("--corpus-rate", toy_rate, "corpus sample rate in Hz")->capture_default_str();
  toy->add_option("--seed", toy_seed, "corpus seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed())
      return cmd_plan(plan_corpus, plan_out, plan_count, plan_hours, plan_seed, plan_ratio,
                      plan_uses, plan_jitter, rate);
    if (build->parsed())
      return cmd_build(build_plan, build_out, build_channel, build_session, build_synthetic,
                       build_attempts, build_jobs, rate);
    if (validate->parsed())
      return cmd_validate(val_dataset, val_masks, val_baseline, val_pesq, val_out, val_jobs);
    if (sweep->parsed())
      return cmd_sweep(sweep_plan, sweep_distances, sweep_masks, sweep_channel, sweep_workdir,
                       sweep_out, sweep_pesq, sweep_attempts, sweep_jobs, rate);
    if (separate->parsed())
      return cmd_separate(sep_in, sep_out1, sep_out2, sep_seed, sep_salience, rate);
    if (show->parsed()) return cmd_show_config(show_channel, rate);
    if (toy->parsed())
      return cmd_make_toy_corpus(toy_out, toy_dialects, toy_speakers, toy_sentences, toy_min,
                                 toy_max, toy_rate, toy_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
