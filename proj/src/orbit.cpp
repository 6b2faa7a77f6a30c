#include "wcg/orbit.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace wcg {

namespace {

constexpr double kEntryLimit = 1e140;
// Same element reached along two float word paths: relative entry drift.
constexpr double kSameTol = 2e-9;
// Beyond this relative distance two elements are certainly distinct;
// in between the run aborts rather than guess.
constexpr double kDistinctTol = 1e-6;

std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

double parse_double(const std::string& token, const std::string& context) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(ErrorKind::format, context + ": bad number '" + token + "'");
  return v;
}

long parse_int(const std::string& token, const std::string& context) {
  const char* begin = token.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    fail(ErrorKind::format, context + ": bad integer '" + token + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string to_string(DedupMode mode) {
  return mode == DedupMode::exact ? "exact" : "float";
}

DedupMode dedup_mode_from_string(std::string_view text) {
  if (text == "exact") return DedupMode::exact;
  if (text == "float") return DedupMode::floating;
  fail(ErrorKind::format, "unknown dedup mode '" + std::string(text) + "'");
}

std::string GeneratorSet::fingerprint() const {
  std::string blob = group.to_string();
  for (const GroupElement& g : elements) {
    for (std::size_t f = 0; f < g.factors.size(); ++f) {
      if (integral) {
        const IntMatrix& m = (*g.exact)[f];
        for (int i = 0; i < m.rows(); ++i)
          for (int j = 0; j < m.cols(); ++j)
            blob += "i" + std::to_string(m(i, j)) + ";";
      } else {
        const Eigen::MatrixXd& m = g.factors[f];
        for (int i = 0; i < m.rows(); ++i)
          for (int j = 0; j < m.cols(); ++j)
            blob += "f" + format_double(m(i, j)) + ";";
      }
    }
    blob += "|";
  }
  return hex16(fnv1a(blob.data(), blob.size()));
}

namespace {

bool same_element_float(const GroupElement& a, const GroupElement& b) {
  for (std::size_t f = 0; f < a.factors.size(); ++f) {
    const auto& ma = a.factors[f];
    const auto& mb = b.factors[f];
    for (int i = 0; i < ma.rows(); ++i)
      for (int j = 0; j < ma.cols(); ++j) {
        double scale =
            std::max({1.0, std::abs(ma(i, j)), std::abs(mb(i, j))});
        if (std::abs(ma(i, j) - mb(i, j)) > kSameTol * scale) return false;
      }
  }
  return true;
}

bool same_element_exact(const GroupElement& a, const GroupElement& b) {
  for (std::size_t f = 0; f < a.factors.size(); ++f)
    if ((*a.exact)[f] != (*b.exact)[f]) return false;
  return true;
}

}  // namespace

GeneratorSet make_generator_set(const GroupDescriptor& desc,
                                std::vector<GroupElement> gens,
                                std::vector<std::string> labels) {
  if (gens.empty())
    fail(ErrorKind::usage, "generator set must be nonempty");
  if (!labels.empty() && labels.size() != gens.size())
    fail(ErrorKind::usage, "label count does not match generator count");

  GeneratorSet out;
  out.group = desc;
  out.user_count = static_cast<int>(gens.size());
  out.integral = true;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    validate_element(desc, gens[i]);
    if (!gens[i].has_exact()) out.integral = false;
    out.elements.push_back(gens[i]);
    out.labels.push_back(labels.empty() ? "g" + std::to_string(i)
                                        : labels[i]);
  }
  if (!out.integral)
    for (GroupElement& g : out.elements) g.exact.reset();

  // Close under inverses.
  std::size_t original = out.elements.size();
  for (std::size_t i = 0; i < original; ++i) {
    GroupElement inv = inverse(out.elements[i]);
    if (!out.integral) inv.exact.reset();
    bool present = false;
    for (const GroupElement& g : out.elements) {
      if (out.integral ? same_element_exact(g, inv)
                       : same_element_float(g, inv)) {
        present = true;
        break;
      }
    }
    if (!present) {
      out.elements.push_back(std::move(inv));
      out.labels.push_back(out.labels[i] + "^-1");
    }
  }
  return out;
}

GeneratorSet load_generators(const GroupDescriptor& desc,
                             const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open generator file '" + path + "'");
  std::vector<GroupElement> gens;
  std::string line;
  int lineno = 0;
  bool all_integral = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string context = path + ":" + std::to_string(lineno);
    std::vector<std::string> factor_specs = split(line, '|');
    if (factor_specs.size() != desc.factors.size())
      fail(ErrorKind::format,
           context + ": expected " + std::to_string(desc.factors.size()) +
               " factors, got " + std::to_string(factor_specs.size()));
    GroupElement g;
    std::vector<IntMatrix> exact;
    bool integral = true;
    for (std::size_t f = 0; f < factor_specs.size(); ++f) {
      std::vector<std::string> head = split(factor_specs[f], ':');
      if (head.size() != 2)
        fail(ErrorKind::format, context + ": factor must be 'n:entries'");
      long n = parse_int(head[0], context);
      if (n != desc.factors[f])
        fail(ErrorKind::format,
             context + ": factor size " + std::to_string(n) +
                 " does not match group " + desc.to_string());
      std::vector<std::string> entries = split(head[1], ',');
      if (static_cast<long>(entries.size()) != n * n)
        fail(ErrorKind::format,
             context + ": expected " + std::to_string(n * n) + " entries");
      Eigen::MatrixXd m(n, n);
      IntMatrix mi(n, n);
      for (long k = 0; k < n * n; ++k) {
        const std::string& tok = entries[k];
        double v = parse_double(tok, context);
        m(k / n, k % n) = v;
        bool is_int = tok.find_first_of(".eE") == std::string::npos;
        if (is_int && std::abs(v) < 9e15)
          mi(k / n, k % n) = static_cast<std::int64_t>(std::llround(v));
        else
          integral = false;
      }
      g.factors.push_back(std::move(m));
      exact.push_back(std::move(mi));
    }
    if (integral) g.exact = std::move(exact);
    if (!integral) all_integral = false;
    gens.push_back(std::move(g));
  }
  if (gens.empty())
    fail(ErrorKind::format, path + ": no generators found");
  if (!all_integral)
    for (GroupElement& g : gens) g.exact.reset();
  return make_generator_set(desc, std::move(gens));
}

GroupDescriptor base_descriptor(const DatasetHeader& header) {
  std::string desc = header.group_desc;
  const std::string prefix = "synthetic ";
  if (desc.rfind(prefix, 0) == 0) desc = desc.substr(prefix.size());
  return GroupDescriptor::parse(desc);
}

RootSystemData dataset_root_system(const DatasetHeader& header) {
  return build_root_system(base_descriptor(header));
}

// ---------------------------------------------------------------------------
// Ball enumeration

namespace {

// Flat storage for the ball: one contiguous slab of matrix entries per
// representation, no per-element allocation.
struct BallStore {
  std::vector<int> sizes;      // factor dimensions
  std::vector<int> offsets;    // entry offset of each factor
  int entries_per_element = 0;
  bool exact = false;

  std::vector<double> fm;
  std::vector<std::int64_t> im;
  std::vector<std::int32_t> depth;
  std::vector<std::int32_t> parent;
  std::vector<std::int16_t> genidx;

  explicit BallStore(const GroupDescriptor& desc, bool exact_mode)
      : exact(exact_mode) {
    int off = 0;
    for (int n : desc.factors) {
      sizes.push_back(n);
      offsets.push_back(off);
      off += n * n;
    }
    entries_per_element = off;
  }

  std::size_t size() const { return depth.size(); }
  const double* fptr(std::size_t e) const {
    return fm.data() + e * entries_per_element;
  }
  const std::int64_t* iptr(std::size_t e) const {
    return im.data() + e * entries_per_element;
  }

  void push(const double* f, const std::int64_t* i, std::int32_t d,
            std::int32_t par, std::int16_t gi) {
    fm.insert(fm.end(), f, f + entries_per_element);
    if (exact) im.insert(im.end(), i, i + entries_per_element);
    depth.push_back(d);
    parent.push_back(par);
    genidx.push_back(gi);
  }

  GroupElement element(std::size_t e) const {
    GroupElement g;
    const double* p = fptr(e);
    for (std::size_t f = 0; f < sizes.size(); ++f) {
      int n = sizes[f];
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = p[offsets[f] + i * n + j];
      g.factors.push_back(std::move(m));
    }
    return g;
  }

  double frobenius(const double* f) const {
    double acc = 0.0;
    for (int k = 0; k < entries_per_element; ++k) acc += f[k] * f[k];
    return std::sqrt(acc);
  }
};

struct FlatGenerators {
  std::vector<double> fm;
  std::vector<std::int64_t> im;
  int entries = 0;
  int count = 0;
};

FlatGenerators flatten_generators(const GeneratorSet& gens,
                                  const BallStore& store) {
  FlatGenerators out;
  out.entries = store.entries_per_element;
  out.count = static_cast<int>(gens.elements.size());
  for (const GroupElement& g : gens.elements) {
    for (std::size_t f = 0; f < store.sizes.size(); ++f) {
      int n = store.sizes[f];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          out.fm.push_back(g.factors[f](i, j));
          if (store.exact) out.im.push_back((*g.exact)[f](i, j));
        }
    }
  }
  return out;
}

std::string word_of(const BallStore& store, const GeneratorSet& gens,
                    std::int64_t e, int extra_gen = -1) {
  std::string word;
  std::vector<int> path;
  while (e > 0) {
    path.push_back(store.genidx[e]);
    e = store.parent[e];
  }
  std::reverse(path.begin(), path.end());
  if (extra_gen >= 0) path.push_back(extra_gen);
  if (path.empty()) return "e";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) word += "*";
    word += gens.labels[path[i]];
  }
  return word;
}

class Dedup {
 public:
  Dedup(BallStore& store, DedupMode mode) : store_(store), mode_(mode) {}

  // Looks up the element stored at `f`/`i`; returns true if it is new and
  // was not present. The caller appends to the store before insert().
  bool contains(const double* f, const std::int64_t* i) const {
    if (mode_ == DedupMode::exact) {
      std::uint64_t h = fnv1a(i, sizeof(std::int64_t) *
                                     store_.entries_per_element);
      auto it = exact_index_.find(h);
      if (it == exact_index_.end()) return false;
      for (std::uint32_t e : it->second)
        if (std::memcmp(store_.iptr(e), i,
                        sizeof(std::int64_t) * store_.entries_per_element) ==
            0)
          return true;
      return false;
    }
    double fr = store_.frobenius(f);
    double halo = kDistinctTol * (1.0 + fr);
    auto lo = float_index_.lower_bound(fr - halo);
    auto hi = float_index_.upper_bound(fr + halo);
    for (auto it = lo; it != hi; ++it) {
      for (std::uint32_t e : it->second) {
        int verdict = compare_float(store_.fptr(e), f);
        if (verdict == 0) return true;
        if (verdict < 0)
          fail(ErrorKind::collision,
               "float dedup cannot certify two elements as same or "
               "distinct (relative distance in the ambiguity zone); "
               "run aborted");
      }
    }
    return false;
  }

  void insert(std::uint32_t e) {
    if (mode_ == DedupMode::exact) {
      std::uint64_t h =
          fnv1a(store_.iptr(e),
                sizeof(std::int64_t) * store_.entries_per_element);
      exact_index_[h].push_back(e);
    } else {
      float_index_[store_.frobenius(store_.fptr(e))].push_back(e);
    }
  }

 private:
  // 0: same, 1: distinct, -1: ambiguous
  int compare_float(const double* a, const double* b) const {
    bool same = true;
    for (int k = 0; k < store_.entries_per_element; ++k) {
      double scale = std::max({1.0, std::abs(a[k]), std::abs(b[k])});
      double diff = std::abs(a[k] - b[k]);
      if (diff > kDistinctTol * scale) return 1;
      if (diff > kSameTol * scale) same = false;
    }
    return same ? 0 : -1;
  }

  BallStore& store_;
  DedupMode mode_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> exact_index_;
  std::map<double, std::vector<std::uint32_t>> float_index_;
};

// -- checkpointing ----------------------------------------------------------

std::string checkpoint_tag(const GeneratorSet& gens, DedupMode mode) {
  return gens.group.to_string() + " " + gens.fingerprint() + " " +
         to_string(mode);
}

void write_checkpoint(const std::string& path, const BallStore& store,
                      const std::string& tag, int maxdone) {
  std::string tmp = path + ".tmp";
  std::ofstream out(tmp);
  if (!out) fail(ErrorKind::io, "cannot write checkpoint '" + path + "'");
  out << "#cpdchk 1\n#tag " << tag << "\n#maxdone " << maxdone << "\n#count "
      << store.size() << "\n";
  char buf[40];
  for (std::size_t e = 0; e < store.size(); ++e) {
    out << store.depth[e] << ' ' << store.parent[e] << ' ' << store.genidx[e];
    if (store.exact) {
      for (int k = 0; k < store.entries_per_element; ++k)
        out << ' ' << store.iptr(e)[k];
    } else {
      for (int k = 0; k < store.entries_per_element; ++k) {
        std::snprintf(buf, sizeof(buf), "%a", store.fptr(e)[k]);
        out << ' ' << buf;
      }
    }
    out << '\n';
  }
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing checkpoint '" + path + "'");
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorKind::io, "cannot move checkpoint into place: " + path);
}

// Returns the completed depth, or -1 when no checkpoint exists.
int read_checkpoint(const std::string& path, BallStore& store,
                    const std::string& tag) {
  std::ifstream in(path);
  if (!in) return -1;
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line))
      fail(ErrorKind::format,
           path + ": truncated checkpoint (missing " + std::string(what) +
               ")");
  };
  next_line("magic");
  if (line != "#cpdchk 1")
    fail(ErrorKind::format, path + ": not a checkpoint file");
  next_line("tag");
  if (line != "#tag " + tag)
    fail(ErrorKind::format,
         path + ": checkpoint belongs to a different run configuration");
  next_line("maxdone");
  int maxdone = static_cast<int>(
      parse_int(line.substr(line.rfind(' ') + 1), path + ":maxdone"));
  next_line("count");
  std::size_t count = static_cast<std::size_t>(
      parse_int(line.substr(line.rfind(' ') + 1), path + ":count"));
  for (std::size_t e = 0; e < count; ++e) {
    next_line("element");
    std::istringstream ss(line);
    std::int32_t d, par;
    std::int16_t gi;
    ss >> d >> par >> gi;
    std::vector<double> f(store.entries_per_element);
    std::vector<std::int64_t> i(store.entries_per_element);
    if (store.exact) {
      for (int k = 0; k < store.entries_per_element; ++k) {
        ss >> i[k];
        f[k] = static_cast<double>(i[k]);
      }
    } else {
      std::string tok;
      for (int k = 0; k < store.entries_per_element; ++k) {
        ss >> tok;
        f[k] = std::strtod(tok.c_str(), nullptr);
      }
    }
    if (!ss)
      fail(ErrorKind::format,
           path + ": malformed checkpoint element line " +
               std::to_string(e));
    store.push(f.data(), i.data(), d, par, gi);
  }
  return maxdone;
}

}  // namespace

OrbitDataset enumerate_ball(const RootSystemData& rs, const GeneratorSet& gens,
                            const EnumerateOptions& opts,
                            EnumerateStats* stats) {
  if (opts.max_length < 0)
    fail(ErrorKind::usage, "max_length must be >= 0");
  if (gens.group != rs.group)
    fail(ErrorKind::usage, "generator set and root system disagree");

  DedupMode mode = opts.dedup.value_or(gens.integral ? DedupMode::exact
                                                     : DedupMode::floating);
  if (mode == DedupMode::exact && !gens.integral)
    fail(ErrorKind::usage,
         "exact dedup requires integer generators");

  // Memory guard: generous a-priori bound (2 * #user generators)^L.
  double log_bound = opts.max_length * std::log(2.0 * gens.user_count);
  if (log_bound > std::log(static_cast<double>(opts.record_cap)))
    fail(ErrorKind::guard,
         "predicted ball bound (2*" + std::to_string(gens.user_count) +
             ")^" + std::to_string(opts.max_length) +
             " exceeds the record cap of " + std::to_string(opts.record_cap) +
             "; raise --record-cap to proceed");

  BallStore store(rs.group, mode == DedupMode::exact);
  Dedup dedup(store, mode);
  FlatGenerators flat = flatten_generators(gens, store);

  int start_depth = 0;
  EnumerateStats local_stats;
  std::string tag = checkpoint_tag(gens, mode);
  if (!opts.checkpoint_path.empty()) {
    int done = read_checkpoint(opts.checkpoint_path, store, tag);
    if (done >= 0) {
      if (done > opts.max_length)
        fail(ErrorKind::usage,
             "checkpoint already covers depth " + std::to_string(done) +
                 " > requested max_length");
      start_depth = done;
      local_stats.resumed_from = done;
      for (std::size_t e = 0; e < store.size(); ++e)
        dedup.insert(static_cast<std::uint32_t>(e));
    }
  }

  if (store.size() == 0) {
    GroupElement id = identity_element(rs.group);
    std::vector<double> f(store.entries_per_element);
    std::vector<std::int64_t> i(store.entries_per_element);
    for (std::size_t fct = 0; fct < store.sizes.size(); ++fct) {
      int n = store.sizes[fct];
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          f[store.offsets[fct] + r * n + c] = id.factors[fct](r, c);
          i[store.offsets[fct] + r * n + c] = (r == c) ? 1 : 0;
        }
    }
    store.push(f.data(), i.data(), 0, -1, -1);
    dedup.insert(0);
    if (!opts.checkpoint_path.empty())
      write_checkpoint(opts.checkpoint_path, store, tag, 0);
  }

  int threads = opts.threads;
  if (threads <= 0)
    threads = std::clamp<int>(std::thread::hardware_concurrency(), 1, 16);

  std::size_t frontier_begin = 0;
  std::size_t frontier_end = store.size();
  if (start_depth > 0) {
    frontier_begin = store.size();
    for (std::size_t e = 0; e < store.size(); ++e)
      if (store.depth[e] == start_depth && frontier_begin == store.size())
        frontier_begin = e;
  }

  const int E = store.entries_per_element;
  for (int level = start_depth; level < opts.max_length; ++level) {
    std::size_t fcount = frontier_end - frontier_begin;
    if (fcount == 0) break;  // group exhausted (finite ball)

    // Candidate products for the whole sphere, computed in deterministic
    // frontier x generator order, optionally in parallel chunks.
    std::size_t total = fcount * flat.count;
    std::vector<double> cf(total * E);
    std::vector<std::int64_t> ci;
    if (store.exact) ci.resize(total * E);
    local_stats.products += total;

    auto expand_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t idx = lo; idx < hi; ++idx) {
        std::size_t e = frontier_begin + idx / flat.count;
        int k = static_cast<int>(idx % flat.count);
        // Word label only materializes on the failure path.
        auto word = [&] { return word_of(store, gens, e, k); };
        for (std::size_t f = 0; f < store.sizes.size(); ++f) {
          int n = store.sizes[f];
          const double* A = store.fptr(e) + store.offsets[f];
          const double* B = flat.fm.data() + k * E + store.offsets[f];
          double* C = cf.data() + idx * E + store.offsets[f];
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
              double acc = 0.0;
              for (int t = 0; t < n; ++t)
                acc += A[r * n + t] * B[t * n + c];
              if (!std::isfinite(acc) || std::abs(acc) > kEntryLimit)
                fail(ErrorKind::overflow,
                     "matrix entry overflow while expanding word " + word());
              C[r * n + c] = acc;
            }
          if (store.exact) {
            const std::int64_t* Ai = store.iptr(e) + store.offsets[f];
            const std::int64_t* Bi = flat.im.data() + k * E + store.offsets[f];
            std::int64_t* Ci = ci.data() + idx * E + store.offsets[f];
            for (int r = 0; r < n; ++r)
              for (int c = 0; c < n; ++c) {
                std::int64_t acc = 0;
                for (int t = 0; t < n; ++t) {
                  std::int64_t prod;
                  if (__builtin_mul_overflow(Ai[r * n + t], Bi[t * n + c],
                                             &prod) ||
                      __builtin_add_overflow(acc, prod, &acc))
                    fail(ErrorKind::overflow,
                         "integer entry overflow while expanding word " +
                             word());
                }
                Ci[r * n + c] = acc;
              }
          }
        }
      }
    };

    if (threads == 1 || total < 4096) {
      expand_range(0, total);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      std::size_t chunk = (total + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, t, lo, hi] {
          try {
            expand_range(lo, hi);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    }

    // Sequential merge keeps insertion order (hence output) independent of
    // the number of threads.
    std::size_t next_begin = store.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
      const double* f = cf.data() + idx * E;
      const std::int64_t* i = store.exact ? ci.data() + idx * E : nullptr;
      if (dedup.contains(f, i)) continue;
      if (store.size() >= opts.record_cap)
        fail(ErrorKind::guard,
             "ball exceeded the record cap of " +
                 std::to_string(opts.record_cap) +
                 "; raise --record-cap to proceed");
      store.push(f, i, level + 1,
                 static_cast<std::int32_t>(frontier_begin + idx / flat.count),
                 static_cast<std::int16_t>(idx % flat.count));
      dedup.insert(static_cast<std::uint32_t>(store.size() - 1));
    }
    frontier_begin = next_begin;
    frontier_end = store.size();

    if (!opts.checkpoint_path.empty())
      write_checkpoint(opts.checkpoint_path, store, tag, level + 1);
  }

  // Project every element and assemble the dataset.
  OrbitDataset ds;
  ds.header.group_desc = rs.group.to_string();
  ds.header.rank = rs.rank;
  ds.header.form = rs.form;
  ds.header.gens_fingerprint = gens.fingerprint();
  ds.header.max_length = opts.max_length;
  ds.header.dedup = mode;
  ds.records.reserve(store.size());
  for (std::size_t e = 0; e < store.size(); ++e) {
    GroupElement g = store.element(e);
    ChamberVector mu = cartan_projection(rs, g);
    OrbitRecord rec;
    rec.word_length = store.depth[e];
    rec.norm = mu.coords.norm();
    rec.rho_pairing = rs.rho.coords.dot(mu.coords);
    rec.mu = std::move(mu);
    ds.records.push_back(std::move(rec));
  }
  sort_records(ds.records);
  if (stats) *stats = local_stats;
  return ds;
}

OrbitDataset enumerate_ball(const RootSystemData& rs, const GeneratorSet& gens,
                            int max_length, std::optional<DedupMode> dedup) {
  EnumerateOptions opts;
  opts.max_length = max_length;
  opts.dedup = dedup;
  return enumerate_ball(rs, gens, opts);
}

void sort_records(std::vector<OrbitRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const OrbitRecord& a, const OrbitRecord& b) {
              if (a.word_length != b.word_length)
                return a.word_length < b.word_length;
              if (a.norm != b.norm) return a.norm < b.norm;
              for (int i = 0; i < a.mu.dim(); ++i)
                if (a.mu.coords[i] != b.mu.coords[i])
                  return a.mu.coords[i] < b.mu.coords[i];
              return false;
            });
}

// ---------------------------------------------------------------------------
// Dataset files

void write_dataset(const OrbitDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << "#cpd 1\n";
  out << "#group " << ds.header.group_desc << "\n";
  out << "#rank " << ds.header.rank << "\n";
  out << "#form " << ds.header.form << "\n";
  out << "#gens " << ds.header.gens_fingerprint << "\n";
  out << "#maxlen " << ds.header.max_length << "\n";
  out << "#dedup " << to_string(ds.header.dedup) << "\n";
  for (const auto& [key, value] : ds.header.meta)
    out << "#meta " << key << " " << value << "\n";
  for (const OrbitRecord& rec : ds.records) {
    out << rec.word_length;
    for (int i = 0; i < rec.mu.dim(); ++i)
      out << ',' << format_double(rec.mu.coords[i]);
    out << '\n';
  }
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

OrbitDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open dataset '" + path + "'");
  OrbitDataset ds;
  std::string line;
  int lineno = 0;
  auto context = [&] { return path + ":" + std::to_string(lineno); };
  auto expect_header = [&](const char* key) {
    if (!std::getline(in, line))
      fail(ErrorKind::format,
           path + ": truncated header (missing " + std::string(key) + ")");
    ++lineno;
    std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0)
      fail(ErrorKind::format,
           context() + ": expected '" + key + " ...', got '" + line + "'");
    return line.substr(prefix.size());
  };

  if (!std::getline(in, line) || (++lineno, line != "#cpd 1"))
    fail(ErrorKind::format,
         path + ":1: not a cpd dataset (bad magic/version line)");
  ds.header.group_desc = expect_header("#group");
  std::string rank_text = expect_header("#rank");
  ds.header.rank = static_cast<int>(parse_int(rank_text, context()));
  ds.header.form = expect_header("#form");
  if (ds.header.form != "trace")
    fail(ErrorKind::format,
         context() + ": unsupported form '" + ds.header.form +
             "' (mixed-normalization comparison rejected)");
  ds.header.gens_fingerprint = expect_header("#gens");
  std::string maxlen_text = expect_header("#maxlen");
  ds.header.max_length = static_cast<int>(parse_int(maxlen_text, context()));
  ds.header.dedup = dedup_mode_from_string(expect_header("#dedup"));

  RootSystemData rs = dataset_root_system(ds.header);
  if (rs.rank != ds.header.rank)
    fail(ErrorKind::format,
         path + ": rank " + std::to_string(ds.header.rank) +
             " does not match group " + ds.header.group_desc + " (rank " +
             std::to_string(rs.rank) + ")");

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#meta ", 0) == 0) {
      std::string rest = line.substr(6);
      std::size_t sp = rest.find(' ');
      if (sp == std::string::npos)
        fail(ErrorKind::format, context() + ": malformed #meta line");
      ds.header.meta.emplace_back(rest.substr(0, sp), rest.substr(sp + 1));
      continue;
    }
    if (line[0] == '#')
      fail(ErrorKind::format, context() + ": unexpected header line '" +
                                  line + "' after records began");
    std::vector<std::string> fields = split(line, ',');
    if (static_cast<int>(fields.size()) != 1 + rs.ambient_dim)
      fail(ErrorKind::format,
           context() + ": expected " + std::to_string(1 + rs.ambient_dim) +
               " comma-separated fields, got " +
               std::to_string(fields.size()));
    OrbitRecord rec;
    rec.word_length = static_cast<int>(parse_int(fields[0], context()));
    if (rec.word_length < 0)
      fail(ErrorKind::format, context() + ": negative word length");
    Vec mu(rs.ambient_dim);
    for (int i = 0; i < rs.ambient_dim; ++i)
      mu[i] = parse_double(fields[1 + i], context());
    rec.mu = ChamberVector{mu};
    if (block_sum_defect(rs, rec.mu) > 1e-9)
      fail(ErrorKind::format,
           context() + ": record is not trace-free per block");
    rec.norm = mu.norm();
    rec.rho_pairing = rs.rho.coords.dot(mu);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace wcg
