#include "mixforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mixforge/errors.hpp"
#include "mixforge/kernels.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace fs = std::filesystem;

void trim_align(AudioClip& gts1, AudioClip& gts2, AudioClip& mix) {
  if (gts1.sample_rate != mix.sample_rate || gts2.sample_rate != mix.sample_rate)
    throw InvalidArgument("trim_align: sample rate mismatch");
  const size_t len = std::max({gts1.samples.size(), gts2.samples.size(), mix.samples.size()});
  gts1.samples.resize(len, 0.0);
  gts2.samples.resize(len, 0.0);
  mix.samples.resize(len, 0.0);
}

namespace {

struct EntryResult {
  ManifestEntry manifest;
  AudioClip gts1, gts2, mix;
};

AudioClip prepare_source(const fs::path& path, double gain_db, int working_rate) {
  AudioClip clip = resample(read_wav(path), working_rate);
  const double gain = std::pow(10.0, gain_db / 20.0);
  for (double& v : clip.samples) v *= gain;
  return clip;
}

// One Algorithm-1 entry: gts1, gts2, then the dual mixture, each retried
// while the session reports lost samples. Nothing is kept from a faulty
// report; a clean recording is never re-recorded.
EntryResult record_entry(const PlanEntry& plan_entry, Session& session,
                         const BuildOptions& opts) {
  EntryResult result;
  result.manifest.mixture_name = plan_entry.mixture_name;

  const AudioClip left = prepare_source(plan_entry.left.path, plan_entry.gain_left_db, opts.working_rate);
  const AudioClip right = prepare_source(plan_entry.right.path, plan_entry.gain_right_db, opts.working_rate);

  const auto record = [&](auto&& call, int& attempts, AudioClip& out) {
    while (attempts < opts.max_attempts) {
      SessionReport report = call();
      ++attempts;
      if (report.clean()) {
        out = std::move(report.recording);
        return true;
      }
    }
    return false;
  };

  bool ok = record([&] { return session.play_record_single(left, ChannelSide::Left); },
                   result.manifest.attempts_gts1, result.gts1);
  if (ok)
    ok = record([&] { return session.play_record_single(right, ChannelSide::Right); },
                result.manifest.attempts_gts2, result.gts2);
  if (ok)
    ok = record([&] { return session.play_record_dual(left, right); },
                result.manifest.attempts_mix, result.mix);
  result.manifest.ok = ok;
  return result;
}

void persist_entry(EntryResult& result, const fs::path& out_root, const BuildOptions& opts) {
  if (!result.manifest.ok) return;

  // Common per-entry downscale keeps the PCM16 boundary from clipping; a
  // shared factor is invisible to SI-SDR and to the magnitude-ratio masks.
  const double peak = std::max({kernels::peak_abs(result.gts1.samples),
                                kernels::peak_abs(result.gts2.samples),
                                kernels::peak_abs(result.mix.samples)});
  if (peak > opts.peak_target && peak > 0.0) {
    const double scale = opts.peak_target / peak;
    for (AudioClip* clip : {&result.gts1, &result.gts2, &result.mix})
      for (double& v : clip->samples) v *= scale;
  }

  const std::string& name = result.manifest.mixture_name;
  result.manifest.gts1_path = "GTS/" + name + "__s1.wav";
  result.manifest.gts2_path = "GTS/" + name + "__s2.wav";
  result.manifest.mix_path = "RealMix/" + name + ".wav";
  write_wav(result.gts1, out_root / result.manifest.gts1_path);
  write_wav(result.gts2, out_root / result.manifest.gts2_path);
  write_wav(result.mix, out_root / result.manifest.mix_path);
}

void prepare_out_root(const fs::path& out_root) {
  std::error_code ec;
  fs::create_directories(out_root / "GTS", ec);
  fs::create_directories(out_root / "RealMix", ec);
  if (!fs::is_directory(out_root / "GTS") || !fs::is_directory(out_root / "RealMix"))
    throw IoError("build_dataset: cannot create output folders under " + out_root.string());
}

void check_plan(const MixturePlan& plan) {
  if (plan.entries.empty()) throw InvalidArgument("build_dataset: empty plan");
}

}  // namespace

DatasetManifest build_dataset(const MixturePlan& plan, Session& session,
                              const fs::path& out_root, const BuildOptions& opts) {
  check_plan(plan);
  prepare_out_root(out_root);

  DatasetManifest manifest;
  manifest.plan_seed = plan.seed;
  manifest.working_rate = opts.working_rate;
  manifest.channel_config_snapshot = "none";
  for (const PlanEntry& entry : plan.entries) {
    EntryResult result = record_entry(entry, session, opts);
    persist_entry(result, out_root, opts);
    manifest.entries.push_back(std::move(result.manifest));
  }
  save_manifest(manifest, manifest_path(out_root));
  return manifest;
}

DatasetManifest build_dataset_simulated(const MixturePlan& plan, const ChannelModel& model,
                                        const fs::path& out_root, const BuildOptions& opts) {
  check_plan(plan);
  prepare_out_root(out_root);

  DatasetManifest manifest;
  manifest.plan_seed = plan.seed;
  manifest.working_rate = opts.working_rate;
  manifest.channel_config_snapshot = channel_config_line(model);
  manifest.entries.resize(plan.entries.size());

  const long long n = static_cast<long long>(plan.entries.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.jobs))
  for (long long i = 0; i < n; ++i) {
    try {
      const PlanEntry& entry = plan.entries[static_cast<size_t>(i)];
      ChannelModel entry_model = model;
      entry_model.seed = entry_seed(model.seed, entry.mixture_name);
      SimulatorSession session(entry_model);
      EntryResult result = record_entry(entry, session, opts);
      persist_entry(result, out_root, opts);
      manifest.entries[static_cast<size_t>(i)] = std::move(result.manifest);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  save_manifest(manifest, manifest_path(out_root));
  return manifest;
}

DatasetManifest build_dataset_synthetic(const MixturePlan& plan, const fs::path& out_root,
                                        const BuildOptions& opts) {
  check_plan(plan);
  prepare_out_root(out_root);

  DatasetManifest manifest;
  manifest.plan_seed = plan.seed;
  manifest.working_rate = opts.working_rate;
  manifest.channel_config_snapshot = "none";

  for (const PlanEntry& entry : plan.entries) {
    EntryResult result;
    result.manifest.mixture_name = entry.mixture_name;
    result.gts1 = prepare_source(entry.left.path, entry.gain_left_db, opts.working_rate);
    result.gts2 = prepare_source(entry.right.path, entry.gain_right_db, opts.working_rate);
    result.mix.sample_rate = opts.working_rate;
    result.mix.samples.resize(std::max(result.gts1.samples.size(), result.gts2.samples.size()), 0.0);
    for (size_t i = 0; i < result.mix.samples.size(); ++i) {
      double v = 0.0;
      if (i < result.gts1.samples.size()) v = result.gts1.samples[i];
      if (i < result.gts2.samples.size()) v += result.gts2.samples[i];
      result.mix.samples[i] = v;
    }
    trim_align(result.gts1, result.gts2, result.mix);
    result.manifest.attempts_gts1 = result.manifest.attempts_gts2 = result.manifest.attempts_mix = 1;
    result.manifest.ok = true;
    persist_entry(result, out_root, opts);
    manifest.entries.push_back(std::move(result.manifest));
  }
  save_manifest(manifest, manifest_path(out_root));
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_manifest: cannot open for writing: " + path.string());
  f << "# mixforge-manifest v1\n";
  f << "# plan_seed=" << manifest.plan_seed << "\n";
  f << "# working_rate=" << manifest.working_rate << "\n";
  f << "# channel " << manifest.channel_config_snapshot << "\n";
  for (const ManifestEntry& e : manifest.entries) {
    f << e.mixture_name << '\t' << (e.gts1_path.empty() ? "-" : e.gts1_path) << '\t'
      << (e.gts2_path.empty() ? "-" : e.gts2_path) << '\t'
      << (e.mix_path.empty() ? "-" : e.mix_path) << '\t' << e.attempts_gts1 << '\t'
      << e.attempts_gts2 << '\t' << e.attempts_mix << '\t' << (e.ok ? "ok" : "failed") << "\n";
  }
  if (!f) throw IoError("save_manifest: write failed: " + path.string());
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_manifest: cannot open: " + path.string());

  std::string line;
  if (!std::getline(f, line) || line.rfind("# mixforge-manifest v1", 0) != 0)
    throw FormatError("load_manifest: missing 'mixforge-manifest v1' header: " + path.string());

  DatasetManifest manifest;
  size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view t = trim(line);
      if (t.rfind("# plan_seed=", 0) == 0)
        manifest.plan_seed = std::strtoull(line.c_str() + 12, nullptr, 10);
      else if (t.rfind("# working_rate=", 0) == 0)
        manifest.working_rate = std::atoi(line.c_str() + 15);
      else if (t.rfind("# channel ", 0) == 0)
        manifest.channel_config_snapshot = std::string(t.substr(10));
      continue;
    }
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 8)
      throw FormatError("load_manifest: expected 8 tab-separated fields at line " +
                        std::to_string(line_no) + ": " + path.string());
    ManifestEntry e;
    e.mixture_name = fields[0];
    e.gts1_path = fields[1] == "-" ? "" : fields[1];
    e.gts2_path = fields[2] == "-" ? "" : fields[2];
    e.mix_path = fields[3] == "-" ? "" : fields[3];
    e.attempts_gts1 = std::atoi(fields[4].c_str());
    e.attempts_gts2 = std::atoi(fields[5].c_str());
    e.attempts_mix = std::atoi(fields[6].c_str());
    if (fields[7] != "ok" && fields[7] != "failed")
      throw FormatError("load_manifest: bad status at line " + std::to_string(line_no));
    e.ok = fields[7] == "ok";
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

}  // namespace mixforge
