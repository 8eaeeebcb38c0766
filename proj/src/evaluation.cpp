#include "mixforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mixforge/errors.hpp"
#include "mixforge/metrics.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace fs = std::filesystem;

namespace {

struct EntryScore {
  std::vector<ValidationRow> rows;
};

EntryScore score_entry(const fs::path& root, const ManifestEntry& entry, const EvalOptions& opts) {
  AudioClip gts1 = read_wav(root / entry.gts1_path);
  AudioClip gts2 = read_wav(root / entry.gts2_path);
  AudioClip mix = read_wav(root / entry.mix_path);
  trim_align(gts1, gts2, mix);

  EntryScore score;
  if (opts.include_baseline) {
    score.rows.push_back({entry.mixture_name, "none", 1, si_sdr(gts1, mix), std::nullopt});
    score.rows.push_back({entry.mixture_name, "none", 2, si_sdr(gts2, mix), std::nullopt});
  }

  PesqHook hook;
  const PesqHook* hook_ptr = nullptr;
  if (opts.pesq_cmd.has_value()) {
    hook.command_template = *opts.pesq_cmd;
    hook_ptr = &hook;
  }
  for (MaskKind kind : opts.kinds) {
    const ValidationRecord rec = validate_ground_truths(gts1, gts2, mix, kind, hook_ptr);
    score.rows.push_back(
        {entry.mixture_name, mask_kind_name(kind), 1, rec.si_sdr_db[0], rec.pesq[0]});
    score.rows.push_back(
        {entry.mixture_name, mask_kind_name(kind), 2, rec.si_sdr_db[1], rec.pesq[1]});
  }
  return score;
}

}  // namespace

std::vector<ValidationRow> validate_dataset(const fs::path& dataset_root, const EvalOptions& opts) {
  const DatasetManifest manifest = load_manifest(manifest_path(dataset_root));

  std::vector<size_t> ok_entries;
  for (size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].ok) ok_entries.push_back(i);
  if (ok_entries.empty())
    throw DegenerateInput("validate_dataset: no ok entries in " + dataset_root.string());

  std::vector<EntryScore> scores(ok_entries.size());
  const long long n = static_cast<long long>(ok_entries.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.jobs))
  for (long long i = 0; i < n; ++i) {
    try {
      scores[static_cast<size_t>(i)] =
          score_entry(dataset_root, manifest.entries[ok_entries[static_cast<size_t>(i)]], opts);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ValidationRow> rows;
  for (EntryScore& s : scores)
    for (ValidationRow& r : s.rows) rows.push_back(std::move(r));
  return rows;
}

double mean_si_sdr(const std::vector<ValidationRow>& rows, const std::string& mask) {
  double sum = 0.0;
  int count = 0;
  for (const ValidationRow& r : rows)
    if (r.mask == mask) {
      sum += r.si_sdr_db;
      ++count;
    }
  if (count == 0) throw InvalidArgument("mean_si_sdr: no rows for mask '" + mask + "'");
  return sum / count;
}

std::optional<double> mean_pesq(const std::vector<ValidationRow>& rows, const std::string& mask) {
  double sum = 0.0;
  int count = 0;
  for (const ValidationRow& r : rows)
    if (r.mask == mask && r.pesq.has_value()) {
      sum += *r.pesq;
      ++count;
    }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::string validation_csv_to_string(const std::vector<ValidationRow>& rows) {
  std::ostringstream out;
  out << "mixture_name,mask,speaker,si_sdr_db,pesq\n";
  for (const ValidationRow& r : rows)
    out << r.mixture_name << ',' << r.mask << ',' << r.speaker << ',' << fmt_f6(r.si_sdr_db)
        << ',' << (r.pesq ? fmt_f6(*r.pesq) : "") << "\n";

  // Aggregate row per mask kind, in first-appearance order.
  std::vector<std::string> kinds;
  for (const ValidationRow& r : rows)
    if (std::find(kinds.begin(), kinds.end(), r.mask) == kinds.end()) kinds.push_back(r.mask);
  for (const std::string& kind : kinds) {
    const std::optional<double> pesq = mean_pesq(rows, kind);
    out << "__mean__," << kind << ",all," << fmt_f6(mean_si_sdr(rows, kind)) << ','
        << (pesq ? fmt_f6(*pesq) : "") << "\n";
  }
  return out.str();
}

void write_validation_csv(const std::vector<ValidationRow>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_validation_csv: cannot open: " + path.string());
  f << validation_csv_to_string(rows);
  if (!f) throw IoError("write_validation_csv: write failed: " + path.string());
}

double direct_path_energy(const ChannelModel& model) {
  const double left = 1.0 / std::max(model.source_distance(ChannelSide::Left), 0.1);
  const double right = 1.0 / std::max(model.source_distance(ChannelSide::Right), 0.1);
  return left * left + right * right;
}

std::vector<SweepRow> run_sweep(const MixturePlan& plan, const SweepOptions& opts) {
  if (opts.distances_m.empty()) throw InvalidArgument("run_sweep: empty distance list");
  for (double d : opts.distances_m)
    if (!(d > 0.0)) throw InvalidArgument("run_sweep: distances must be positive");
  std::vector<double> distances = opts.distances_m;
  std::sort(distances.begin(), distances.end());
  if (std::adjacent_find(distances.begin(), distances.end()) != distances.end())
    throw InvalidArgument("run_sweep: distances must be distinct");
  if (opts.kinds.empty()) throw InvalidArgument("run_sweep: no mask kinds");

  // Per-distance aggregates, then rows grouped by kind with increasing
  // distance inside each kind.
  struct DistanceResult {
    std::vector<ValidationRow> rows;
    int n_mixtures = 0;
    double direct_energy = 0.0;
  };
  std::vector<DistanceResult> results(distances.size());

  for (size_t di = 0; di < distances.size(); ++di) {
    ChannelModel model = opts.base_model;
    model.mic_distance_m = distances[di];

    std::ostringstream dirname;
    dirname << "dist_" << fmt_f6(distances[di]);
    const fs::path out_root = opts.workdir / dirname.str();

    BuildOptions build;
    build.max_attempts = opts.max_attempts;
    build.working_rate = opts.working_rate;
    build.jobs = opts.jobs;
    const DatasetManifest manifest = build_dataset_simulated(plan, model, out_root, build);

    EvalOptions eval;
    eval.kinds = opts.kinds;
    eval.pesq_cmd = opts.pesq_cmd;
    eval.include_baseline = true;
    eval.jobs = opts.jobs;
    DistanceResult& res = results[di];
    res.rows = validate_dataset(out_root, eval);
    for (const ManifestEntry& e : manifest.entries)
      if (e.ok) ++res.n_mixtures;
    res.direct_energy = direct_path_energy(model);
  }

  std::vector<SweepRow> rows;
  for (MaskKind kind : opts.kinds) {
    const std::string name = mask_kind_name(kind);
    for (size_t di = 0; di < distances.size(); ++di) {
      const DistanceResult& res = results[di];
      SweepRow row;
      row.distance_m = distances[di];
      row.mask = name;
      row.mean_si_sdr_db = mean_si_sdr(res.rows, name);
      row.mean_pesq = mean_pesq(res.rows, name);
      row.n_mixtures = res.n_mixtures;
      row.direct_path_energy = res.direct_energy;
      row.mean_unprocessed_si_sdr_db = mean_si_sdr(res.rows, "none");
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv_to_string(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "distance_m,mask,mean_si_sdr_db,mean_pesq,n,direct_path_energy,mean_unprocessed_si_sdr_db\n";
  for (const SweepRow& r : rows)
    out << fmt_f6(r.distance_m) << ',' << r.mask << ',' << fmt_f6(r.mean_si_sdr_db) << ','
        << (r.mean_pesq ? fmt_f6(*r.mean_pesq) : "") << ',' << r.n_mixtures << ','
        << fmt_f6(r.direct_path_energy) << ',' << fmt_f6(r.mean_unprocessed_si_sdr_db) << "\n";
  return out.str();
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_sweep_csv: cannot open: " + path.string());
  f << sweep_csv_to_string(rows);
  if (!f) throw IoError("write_sweep_csv: write failed: " + path.string());
}

}  // namespace mixforge
