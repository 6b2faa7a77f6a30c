#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "wcg/orbit.hpp"

using namespace wcg;

namespace {

GroupElement diag2(double t) {
  GroupElement g;
  Eigen::MatrixXd m(2, 2);
  m << std::exp(t), 0.0, 0.0, std::exp(-t);
  g.factors.push_back(m);
  return g;
}

GroupElement int2(std::int64_t a, std::int64_t b, std::int64_t c,
                  std::int64_t d) {
  GroupElement g;
  IntMatrix mi(2, 2);
  mi << a, b, c, d;
  g.exact = std::vector<IntMatrix>{mi};
  g.factors.push_back(mi.cast<double>());
  return g;
}

GeneratorSet cyclic_gens() {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  return make_generator_set(rs.group, {diag2(1.0)});
}

GeneratorSet z2_gens() {
  GroupDescriptor desc = GroupDescriptor::parse("sl2xsl2");
  GroupElement a, b;
  Eigen::MatrixXd d(2, 2), id(2, 2);
  d << std::exp(1.0), 0.0, 0.0, std::exp(-1.0);
  id.setIdentity();
  a.factors = {d, id};
  b.factors = {id, d};
  return make_generator_set(desc, {a, b});
}

GeneratorSet free2_gens() {
  GroupDescriptor desc = GroupDescriptor::parse("sl2");
  return make_generator_set(desc, {int2(1, 2, 0, 1), int2(1, 0, 2, 1)},
                            {"a", "b"});
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string tmp_path(const std::string& name) {
  return "/tmp/wcg_test_" + name;
}

// Brute-force oracle for the Z^2 ball: lattice points with |a|+|b| <= L.
int z2_ball_count(int L) {
  int count = 0;
  for (int a = -L; a <= L; ++a)
    for (int b = -L; b <= L; ++b)
      if (std::abs(a) + std::abs(b) <= L) ++count;
  return count;
}

}  // namespace

TEST_CASE("generator set normalization") {
  GeneratorSet gens = cyclic_gens();
  CHECK(gens.user_count == 1);
  CHECK(gens.elements.size() == 2);  // inverse auto-added
  CHECK_FALSE(gens.integral);

  GeneratorSet free2 = free2_gens();
  CHECK(free2.user_count == 2);
  CHECK(free2.elements.size() == 4);
  CHECK(free2.integral);
  CHECK(free2.fingerprint().size() == 16);
}

TEST_CASE("cyclic ball has 2L+1 records") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  GeneratorSet gens = cyclic_gens();
  for (int L : {0, 1, 5, 12}) {
    EnumerateOptions opts;
    opts.max_length = L;
    opts.record_cap = 100'000'000;
    OrbitDataset ds = enumerate_ball(rs, gens, opts);
    CHECK(ds.records.size() == std::size_t(2 * L + 1));
    // identity exactly once, as the first record
    CHECK(ds.records[0].word_length == 0);
    CHECK(ds.records[0].norm == 0.0);
    int zero_count = 0;
    for (const OrbitRecord& r : ds.records)
      if (r.norm == 0.0) ++zero_count;
    CHECK(zero_count == 1);
  }
}

TEST_CASE("Z^2 ball matches the lattice-point oracle") {
  GeneratorSet gens = z2_gens();
  RootSystemData rs = build_root_system(gens.group);
  for (int L : {1, 4, 9}) {
    EnumerateOptions opts;
    opts.max_length = L;
    opts.record_cap = 100'000'000;
    OrbitDataset ds = enumerate_ball(rs, gens, opts);
    CHECK(ds.records.size() == std::size_t(z2_ball_count(L)));
    CHECK(ds.records.size() == std::size_t(2 * L * L + 2 * L + 1));
  }
}

TEST_CASE("free group ball counts 2*3^L - 1") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  std::size_t expected = 1;
  for (int L : {1, 2, 3, 4, 5, 6}) {
    expected = 2 * static_cast<std::size_t>(std::pow(3, L)) - 1;
    EnumerateOptions opts;
    opts.max_length = L;
    opts.record_cap = 100'000'000;
    OrbitDataset ds = enumerate_ball(rs, gens, opts);
    CHECK(ds.records.size() == expected);
  }
}

TEST_CASE("float and exact dedup agree on integer generators") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  EnumerateOptions opts;
  opts.max_length = 5;
  opts.record_cap = 100'000'000;
  opts.dedup = DedupMode::exact;
  OrbitDataset exact_ds = enumerate_ball(rs, gens, opts);
  opts.dedup = DedupMode::floating;
  OrbitDataset float_ds = enumerate_ball(rs, gens, opts);
  CHECK(exact_ds.records.size() == float_ds.records.size());
}

TEST_CASE("ball nesting") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  EnumerateOptions opts;
  opts.record_cap = 100'000'000;
  opts.max_length = 3;
  OrbitDataset small = enumerate_ball(rs, gens, opts);
  opts.max_length = 4;
  OrbitDataset big = enumerate_ball(rs, gens, opts);
  std::set<std::string> big_keys;
  for (const OrbitRecord& r : big.records) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%d|%.17g|%.17g", r.word_length,
                  r.mu.coords[0], r.mu.coords[1]);
    big_keys.insert(buf);
  }
  for (const OrbitRecord& r : small.records) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%d|%.17g|%.17g", r.word_length,
                  r.mu.coords[0], r.mu.coords[1]);
    CHECK(big_keys.count(buf) == 1);
  }
  CHECK(small.records.size() < big.records.size());
}

TEST_CASE("determinism across thread counts") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  EnumerateOptions opts;
  opts.max_length = 6;
  opts.record_cap = 100'000'000;
  opts.threads = 1;
  OrbitDataset a = enumerate_ball(rs, gens, opts);
  opts.threads = 4;
  OrbitDataset b = enumerate_ball(rs, gens, opts);
  std::string pa = tmp_path("det_a.cpd");
  std::string pb = tmp_path("det_b.cpd");
  write_dataset(a, pa);
  write_dataset(b, pb);
  CHECK(slurp(pa) == slurp(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}

TEST_CASE("memory guard refuses explosive runs") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  EnumerateOptions opts;
  opts.max_length = 30;
  opts.record_cap = 1000;
  CHECK_THROWS_WITH_AS(enumerate_ball(rs, gens, opts),
                       doctest::Contains("record cap"), Error);
}

TEST_CASE("overflow reports the offending word") {
  GroupDescriptor desc = GroupDescriptor::parse("sl2");
  RootSystemData rs = build_root_system(desc);
  GeneratorSet gens =
      make_generator_set(desc, {int2(3'000'000'000LL, 1, 2'999'999'999LL, 1)},
                         {"big"});
  EnumerateOptions opts;
  opts.max_length = 3;
  opts.record_cap = 1'000'000;
  try {
    enumerate_ball(rs, gens, opts);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::overflow);
    CHECK(std::string(e.what()).find("big") != std::string::npos);
  }
}

TEST_CASE("dataset round trip is exact") {
  GeneratorSet gens = z2_gens();
  RootSystemData rs = build_root_system(gens.group);
  EnumerateOptions opts;
  opts.max_length = 5;
  opts.record_cap = 1'000'000;
  OrbitDataset ds = enumerate_ball(rs, gens, opts);
  ds.header.meta.emplace_back("note", "round trip test");
  std::string p1 = tmp_path("rt1.cpd");
  std::string p2 = tmp_path("rt2.cpd");
  write_dataset(ds, p1);
  OrbitDataset back = read_dataset(p1);
  CHECK(back.header.group_desc == ds.header.group_desc);
  CHECK(back.header.rank == ds.header.rank);
  CHECK(back.header.gens_fingerprint == ds.header.gens_fingerprint);
  CHECK(back.header.max_length == ds.header.max_length);
  CHECK(back.header.dedup == ds.header.dedup);
  CHECK(back.header.meta == ds.header.meta);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.records[i].word_length == ds.records[i].word_length);
    CHECK((back.records[i].mu.coords - ds.records[i].mu.coords).norm() ==
          0.0);
    CHECK(back.records[i].norm == ds.records[i].norm);
    CHECK(back.records[i].rho_pairing == ds.records[i].rho_pairing);
  }
  write_dataset(back, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("empty ball dataset still has the identity") {
  GeneratorSet gens = cyclic_gens();
  RootSystemData rs = build_root_system(gens.group);
  OrbitDataset ds = enumerate_ball(rs, gens, 0);
  REQUIRE(ds.records.size() == 1);
  CHECK(ds.records[0].word_length == 0);
  CHECK(ds.records[0].norm == 0.0);
  std::string p = tmp_path("empty.cpd");
  write_dataset(ds, p);
  OrbitDataset back = read_dataset(p);
  CHECK(back.records.size() == 1);
  std::remove(p.c_str());
}

TEST_CASE("malformed dataset files give structured errors") {
  std::string p = tmp_path("bad.cpd");

  SUBCASE("corrupted rank line") {
    std::ofstream out(p);
    out << "#cpd 1\n#group sl2\n#rank two\n#form trace\n#gens 0\n"
        << "#maxlen 1\n#dedup float\n";
    out.close();
    try {
      read_dataset(p);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::format);
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }

  SUBCASE("rank mismatch") {
    std::ofstream out(p);
    out << "#cpd 1\n#group sl2\n#rank 5\n#form trace\n#gens 0\n"
        << "#maxlen 1\n#dedup float\n";
    out.close();
    CHECK_THROWS_WITH_AS(read_dataset(p), doctest::Contains("rank"), Error);
  }

  SUBCASE("bad magic") {
    std::ofstream out(p);
    out << "#cpd 99\n";
    out.close();
    CHECK_THROWS_AS(read_dataset(p), Error);
  }

  SUBCASE("record with wrong field count") {
    std::ofstream out(p);
    out << "#cpd 1\n#group sl2\n#rank 1\n#form trace\n#gens 0\n"
        << "#maxlen 1\n#dedup float\n1,0.5\n";
    out.close();
    CHECK_THROWS_WITH_AS(read_dataset(p), doctest::Contains(":8"), Error);
  }

  std::remove(p.c_str());
}

TEST_CASE("generator file loading") {
  std::string p = tmp_path("gens.txt");
  {
    std::ofstream out(p);
    out << "# free pair\n";
    out << "2:1,2,0,1\n";
    out << "2:1,0,2,1\n";
  }
  GroupDescriptor desc = GroupDescriptor::parse("sl2");
  GeneratorSet gens = load_generators(desc, p);
  CHECK(gens.user_count == 2);
  CHECK(gens.integral);
  CHECK(gens.elements.size() == 4);

  {
    std::ofstream out(p);
    out << "2:1,2,0\n";
  }
  CHECK_THROWS_AS(load_generators(desc, p), Error);

  {
    std::ofstream out(p);
    out << "2:1.5,0,0,0.5\n";
  }
  CHECK_THROWS_AS(load_generators(desc, p), Error);  // not unimodular

  std::remove(p.c_str());
  CHECK_THROWS_AS(load_generators(desc, p), Error);  // missing file
}

TEST_CASE("checkpoint resume matches a fresh run") {
  GeneratorSet gens = free2_gens();
  RootSystemData rs = build_root_system(gens.group);
  std::string cp = tmp_path("resume.cpdchk");
  std::remove(cp.c_str());

  EnumerateOptions opts;
  opts.record_cap = 1'000'000;
  opts.checkpoint_path = cp;
  opts.max_length = 4;
  enumerate_ball(rs, gens, opts);

  opts.max_length = 6;
  EnumerateStats stats;
  OrbitDataset resumed = enumerate_ball(rs, gens, opts, &stats);
  CHECK(stats.resumed_from == 4);

  EnumerateOptions fresh;
  fresh.record_cap = 1'000'000;
  fresh.max_length = 6;
  OrbitDataset direct = enumerate_ball(rs, gens, fresh);

  std::string pa = tmp_path("resumed.cpd");
  std::string pb = tmp_path("direct.cpd");
  write_dataset(resumed, pa);
  write_dataset(direct, pb);
  CHECK(slurp(pa) == slurp(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());

  // A checkpoint from a different generator set is rejected.
  GeneratorSet other = cyclic_gens();
  RootSystemData rs2 = build_root_system(other.group);
  EnumerateOptions bad;
  bad.max_length = 2;
  bad.checkpoint_path = cp;
  CHECK_THROWS_AS(enumerate_ball(rs2, other, bad), Error);
  std::remove(cp.c_str());
}
