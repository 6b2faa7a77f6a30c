#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcg/cartan.hpp"
#include "wcg/chamber.hpp"

namespace wcg {

enum class DedupMode { exact, floating };

std::string to_string(DedupMode mode);
DedupMode dedup_mode_from_string(std::string_view text);

// Finite symmetric generating set. Construction validates unimodularity,
// closes the set under inverses, and records whether exact integer
// representations are available for all generators.
struct GeneratorSet {
  GroupDescriptor group;
  std::vector<GroupElement> elements;
  std::vector<std::string> labels;
  int user_count = 0;  // generators as supplied, before inverse closure
  bool integral = false;

  std::string fingerprint() const;
};

GeneratorSet make_generator_set(const GroupDescriptor& desc,
                                std::vector<GroupElement> gens,
                                std::vector<std::string> labels = {});

// One element per line, factors separated by '|', each factor written as
// "n:a11,a12,...,ann". Blank lines and '#' comments are skipped.
GeneratorSet load_generators(const GroupDescriptor& desc,
                             const std::string& path);

struct OrbitRecord {
  int word_length = 0;
  ChamberVector mu;
  double norm = 0.0;
  double rho_pairing = 0.0;
};

struct DatasetHeader {
  std::string group_desc;  // "sl2", "sl2xsl3", or "synthetic <desc>"
  int rank = 0;
  std::string form = "trace";
  std::string gens_fingerprint;
  int max_length = 0;
  DedupMode dedup = DedupMode::floating;
  // Optional "#meta <key> <value>" lines carried through round-trips.
  std::vector<std::pair<std::string, std::string>> meta;
};

struct OrbitDataset {
  DatasetHeader header;
  std::vector<OrbitRecord> records;
};

// Underlying group descriptor, with any "synthetic " prefix stripped.
GroupDescriptor base_descriptor(const DatasetHeader& header);
RootSystemData dataset_root_system(const DatasetHeader& header);

struct EnumerateOptions {
  int max_length = 0;
  std::optional<DedupMode> dedup;  // default: exact when integral
  std::uint64_t record_cap = 2'000'000;
  int threads = 1;                 // 0 = hardware concurrency
  std::string checkpoint_path;     // empty = no checkpointing
};

struct EnumerateStats {
  std::uint64_t products = 0;
  int resumed_from = -1;  // completed sphere a checkpoint restored, or -1
};

// Breadth-first closure of words of length <= max_length. Each distinct
// group element yields one record; output is sorted by (word_length,
// norm, lexicographic mu) and is independent of thread count.
OrbitDataset enumerate_ball(const RootSystemData& rs, const GeneratorSet& gens,
                            const EnumerateOptions& opts,
                            EnumerateStats* stats = nullptr);

OrbitDataset enumerate_ball(const RootSystemData& rs, const GeneratorSet& gens,
                            int max_length,
                            std::optional<DedupMode> dedup = std::nullopt);

void write_dataset(const OrbitDataset& ds, const std::string& path);
OrbitDataset read_dataset(const std::string& path);

// Canonical record order used by all producers.
void sort_records(std::vector<OrbitRecord>& records);

}  // namespace wcg
