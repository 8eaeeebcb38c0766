#include "mixforge/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mixforge/errors.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace fs = std::filesystem;

uint64_t entry_seed(uint64_t plan_seed, const std::string& mixture_name) {
  return mix64(plan_seed, fnv1a64(mixture_name));
}

std::vector<SourceFile> scan_corpus(const fs::path& root, int working_rate) {
  if (working_rate <= 0) throw InvalidArgument("scan_corpus: non-positive working rate");
  if (!fs::exists(root) || !fs::is_directory(root))
    throw IoError("scan_corpus: corpus directory not found: " + root.string());

  std::vector<SourceFile> files;
  for (const auto& dialect_dir : fs::directory_iterator(root)) {
    if (!dialect_dir.is_directory()) continue;
    for (const auto& speaker_dir : fs::directory_iterator(dialect_dir.path())) {
      if (!speaker_dir.is_directory()) continue;
      for (const auto& wav : fs::directory_iterator(speaker_dir.path())) {
        if (!wav.is_regular_file()) continue;
        std::string ext = wav.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext != ".wav") continue;

        SourceFile sf;
        sf.dialect = dialect_dir.path().filename().string();
        sf.speaker_id = speaker_dir.path().filename().string();
        sf.sentence_id = wav.path().stem().string();
        if (!sf.speaker_id.empty() && (sf.speaker_id[0] == 'F' || sf.speaker_id[0] == 'M'))
          sf.gender = sf.speaker_id[0];
        sf.path = wav.path();

        const WavInfo info = read_wav_info(wav.path());
        sf.duration = (info.frames * working_rate + info.sample_rate / 2) / info.sample_rate;
        files.push_back(std::move(sf));
      }
    }
  }
  if (files.empty())
    throw FormatError("scan_corpus: no wav files under " + root.string());

  std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) {
    return a.canonical_name() < b.canonical_name();
  });

  std::set<std::string> seen;
  for (const SourceFile& f : files)
    if (!seen.insert(f.canonical_name()).second)
      throw FormatError("scan_corpus: duplicate (dialect, speaker, sentence): " + f.canonical_name());
  return files;
}

namespace {

struct Bucket {
  std::string dialect;
  std::string speaker;
  std::vector<size_t> file_idx;
  size_t next_file = 0;
};

bool ratio_ok(long long a, long long b, double max_ratio) {
  if (a <= 0 || b <= 0) return a == b;
  const double hi = static_cast<double>(std::max(a, b));
  const double lo = static_cast<double>(std::min(a, b));
  return hi / lo <= max_ratio;
}

}  // namespace

MixturePlan build_mixture_list(const std::vector<SourceFile>& files, const PlannerOptions& opts) {
  if (opts.count < 1) throw InvalidArgument("build_mixture_list: count must be >= 1");
  if (opts.max_uses_per_speaker < 1)
    throw InvalidArgument("build_mixture_list: max_uses_per_speaker must be >= 1");
  if (files.empty()) throw InvalidArgument("build_mixture_list: no source files");

  // Buckets ordered by (dialect, speaker); the greedy round-robins over them.
  std::map<std::pair<std::string, std::string>, std::vector<size_t>> grouped;
  for (size_t i = 0; i < files.size(); ++i)
    grouped[{files[i].dialect, files[i].speaker_id}].push_back(i);

  std::set<std::string> speaker_ids;
  for (const SourceFile& f : files) speaker_ids.insert(f.speaker_id);
  if (speaker_ids.size() < 2)
    throw InfeasibleError("build_mixture_list: need at least 2 distinct speakers (same-speaker pairs are rejected)");

  const long long capacity =
      static_cast<long long>(speaker_ids.size()) * opts.max_uses_per_speaker;
  if (2ll * opts.count > capacity)
    throw InfeasibleError(
        "build_mixture_list: count " + std::to_string(opts.count) +
        " needs " + std::to_string(2ll * opts.count) + " speaker slots but max_uses_per_speaker " +
        std::to_string(opts.max_uses_per_speaker) + " over " + std::to_string(speaker_ids.size()) +
        " speakers allows only " + std::to_string(capacity));

  std::vector<Bucket> buckets;
  for (auto& [key, idx] : grouped) buckets.push_back({key.first, key.second, idx, 0});

  std::mt19937_64 rng(opts.seed);
  std::map<std::string, int> speaker_uses;
  std::vector<int> file_uses(files.size(), 0);

  MixturePlan plan;
  plan.seed = opts.seed;

  size_t cursor = 0;
  size_t stalled = 0;
  bool saw_cap_block = false, saw_sentence_block = false, saw_self_block = false;

  while (plan.entries.size() < static_cast<size_t>(opts.count)) {
    if (stalled >= buckets.size()) {
      std::string reason = "no feasible pair remains";
      if (saw_cap_block) reason += "; binding constraint: max_uses_per_speaker";
      else if (saw_sentence_block) reason += "; binding constraint: sentence diversity";
      else if (saw_self_block) reason += "; binding constraint: distinct files per pair";
      throw InfeasibleError("build_mixture_list: " + reason + " after " +
                            std::to_string(plan.entries.size()) + " of " +
                            std::to_string(opts.count) + " entries");
    }

    Bucket& bucket = buckets[cursor];
    cursor = (cursor + 1) % buckets.size();

    if (speaker_uses[bucket.speaker] >= opts.max_uses_per_speaker) {
      saw_cap_block = true;
      ++stalled;
      continue;
    }

    // Least-used file of this speaker, scanning from the rotating cursor so
    // equally-used files take turns.
    size_t left_idx = bucket.file_idx[bucket.next_file % bucket.file_idx.size()];
    for (size_t k = 1; k < bucket.file_idx.size(); ++k) {
      const size_t cand = bucket.file_idx[(bucket.next_file + k) % bucket.file_idx.size()];
      if (file_uses[cand] < file_uses[left_idx]) left_idx = cand;
    }
    const SourceFile& left = files[left_idx];

    std::vector<size_t> candidates;
    for (size_t i = 0; i < files.size(); ++i) {
      if (i == left_idx) { saw_self_block = true; continue; }
      if (files[i].speaker_id == left.speaker_id) continue;
      if (speaker_uses[files[i].speaker_id] >= opts.max_uses_per_speaker) { saw_cap_block = true; continue; }
      if (files[i].sentence_id == left.sentence_id) { saw_sentence_block = true; continue; }
      candidates.push_back(i);
    }
    if (candidates.empty()) {
      ++stalled;
      continue;
    }

    std::vector<size_t> pool;
    for (size_t i : candidates)
      if (ratio_ok(left.duration, files[i].duration, opts.max_len_ratio)) pool.push_back(i);
    if (pool.empty()) pool = candidates;  // length criterion applies when satisfiable

    // Prefer lightly-used partners, then the closest duration, seeded ties.
    int best_uses = opts.max_uses_per_speaker;
    for (size_t i : pool) best_uses = std::min(best_uses, speaker_uses[files[i].speaker_id]);
    long long best_gap = -1;
    std::vector<size_t> tied;
    for (size_t i : pool) {
      if (speaker_uses[files[i].speaker_id] != best_uses) continue;
      const long long gap = std::llabs(left.duration - files[i].duration);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        tied.assign(1, i);
      } else if (gap == best_gap) {
        tied.push_back(i);
      }
    }
    size_t right_idx = tied.size() == 1
                           ? tied[0]
                           : tied[std::uniform_int_distribution<size_t>(0, tied.size() - 1)(rng)];
    const SourceFile& right = files[right_idx];

    PlanEntry entry;
    entry.left = left;
    entry.right = right;
    entry.mixture_name = left.canonical_name() + "__" + right.canonical_name();
    if (opts.gain_jitter_db > 0.0) {
      std::uniform_real_distribution<double> jitter(-opts.gain_jitter_db, opts.gain_jitter_db);
      entry.gain_left_db = jitter(rng);
      entry.gain_right_db = jitter(rng);
    }
    plan.entries.push_back(std::move(entry));

    ++speaker_uses[left.speaker_id];
    ++speaker_uses[right.speaker_id];
    ++file_uses[left_idx];
    ++file_uses[right_idx];
    bucket.next_file = (bucket.next_file + 1) % bucket.file_idx.size();
    stalled = 0;
    saw_cap_block = saw_sentence_block = saw_self_block = false;
  }
  return plan;
}

std::string plan_to_string(const MixturePlan& plan) {
  std::ostringstream out;
  out << "# mixforge-plan v1 seed=" << plan.seed << "\n";
  for (const PlanEntry& e : plan.entries)
    out << e.mixture_name << '\t' << e.left.path.string() << '\t' << e.right.path.string() << '\t'
        << fmt_f6(e.gain_left_db) << '\t' << fmt_f6(e.gain_right_db) << "\n";
  return out.str();
}

void save_plan(const MixturePlan& plan, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_plan: cannot open for writing: " + path.string());
  f << plan_to_string(plan);
  if (!f) throw IoError("save_plan: write failed: " + path.string());
}

namespace {

SourceFile source_from_canonical(const std::string& canonical, const fs::path& path) {
  SourceFile sf;
  sf.path = path;
  const std::vector<std::string> parts = split(canonical, '_');
  if (parts.size() == 3) {
    sf.dialect = parts[0];
    sf.speaker_id = parts[1];
    sf.sentence_id = parts[2];
    if (!sf.speaker_id.empty() && (sf.speaker_id[0] == 'F' || sf.speaker_id[0] == 'M'))
      sf.gender = sf.speaker_id[0];
  } else {
    sf.speaker_id = canonical;
  }
  return sf;
}

}  // namespace

MixturePlan load_plan(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_plan: cannot open: " + path.string());

  std::string header;
  if (!std::getline(f, header) || header.rfind("# mixforge-plan v1", 0) != 0)
    throw FormatError("load_plan: missing 'mixforge-plan v1' header: " + path.string());

  MixturePlan plan;
  const size_t seed_pos = header.find("seed=");
  if (seed_pos != std::string::npos)
    plan.seed = std::strtoull(header.c_str() + seed_pos + 5, nullptr, 10);

  std::string line;
  size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 5)
      throw FormatError("load_plan: expected 5 tab-separated fields at line " +
                        std::to_string(line_no) + ": " + path.string());
    PlanEntry e;
    e.mixture_name = fields[0];
    const size_t sep = e.mixture_name.find("__");
    const std::string left_canon =
        sep == std::string::npos ? e.mixture_name : e.mixture_name.substr(0, sep);
    const std::string right_canon =
        sep == std::string::npos ? std::string() : e.mixture_name.substr(sep + 2);
    e.left = source_from_canonical(left_canon, fields[1]);
    e.right = source_from_canonical(right_canon, fields[2]);
    e.gain_left_db = std::strtod(fields[3].c_str(), nullptr);
    e.gain_right_db = std::strtod(fields[4].c_str(), nullptr);
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

}  // namespace mixforge
