#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "dqe/container.hpp"
#include "dqe/errors.hpp"

using namespace dqe;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string temp_path(const char* name) {
  return std::string("container_test_") + name + ".bin";
}

ContainerWriter sample_writer() {
  ContainerWriter w("DQE1", 1);
  w.set_meta("kind", "test");
  w.set_meta("ratio", 1.0 / 3.0);
  w.set_meta("count", static_cast<std::int64_t>(-7));
  w.set_meta_u64("seed", 0xdeadbeefcafeULL);
  Eigen::VectorXd v(3);
  v << 1.5, -2.25, 1e-300;
  w.add_vector("vec", v);
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  w.add_matrix("mat", m);
  return w;
}

}  // namespace

TEST_SUITE("container") {

TEST_CASE("round trip preserves bytes and values") {
  const std::string p1 = temp_path("rt1"), p2 = temp_path("rt2");
  sample_writer().write(p1);

  ContainerReader r(p1, "DQE1", 1);
  CHECK(r.meta("kind") == "test");
  CHECK(r.meta_double("ratio") == 1.0 / 3.0);
  CHECK(r.meta_int("count") == -7);
  CHECK(r.meta_u64("seed") == 0xdeadbeefcafeULL);
  CHECK(r.vector("vec")[2] == 1e-300);
  CHECK(r.matrix("mat")(1, 2) == 6.0);
  CHECK(r.array_names().size() == 2);

  // save -> load -> save is byte-identical
  ContainerWriter w2("DQE1", 1);
  w2.set_meta("kind", r.meta("kind"));
  w2.set_meta("ratio", r.meta_double("ratio"));
  w2.set_meta("count", r.meta_int("count"));
  w2.set_meta_u64("seed", r.meta_u64("seed"));
  w2.add_vector("vec", r.vector("vec"));
  w2.add_matrix("mat", r.matrix("mat"));
  w2.write(p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("file size is exactly header plus payload") {
  const std::string p = temp_path("size");
  sample_writer().write(p);
  const std::string bytes = slurp(p);
  const std::uint64_t hlen = *reinterpret_cast<const std::uint64_t*>(bytes.data() + 8);
  CHECK(bytes.size() == 4 + 4 + 8 + hlen + (3 + 6) * sizeof(double));
  std::remove(p.c_str());
}

TEST_CASE("bad magic, version, truncation, padding") {
  const std::string p = temp_path("bad");
  sample_writer().write(p);
  const std::string good = slurp(p);

  std::string corrupt = good;
  corrupt[0] = 'X';
  spit(p, corrupt);
  CHECK_THROWS_AS(ContainerReader(p, "DQE1", 1), FormatError);
  CHECK_THROWS_WITH_AS(ContainerReader(p, "DQE1", 1),
                       doctest::Contains("bad magic"), FormatError);

  spit(p, good);
  CHECK_THROWS_WITH_AS(ContainerReader(p, "DQE1", 2),
                       doctest::Contains("unsupported format version"), FormatError);

  spit(p, good.substr(0, good.size() - 5));
  CHECK_THROWS_WITH_AS(ContainerReader(p, "DQE1", 1), doctest::Contains("truncated"),
                       FormatError);

  spit(p, good + std::string("zz"));
  CHECK_THROWS_WITH_AS(ContainerReader(p, "DQE1", 1), doctest::Contains("trailing"),
                       FormatError);

  spit(p, good.substr(0, 10));
  CHECK_THROWS_AS(ContainerReader(p, "DQE1", 1), FormatError);
  std::remove(p.c_str());
}

TEST_CASE("rank mismatches are format errors") {
  const std::string p = temp_path("rank");
  sample_writer().write(p);
  ContainerReader r(p, "DQE1", 1);
  CHECK_THROWS_AS(r.matrix("vec"), FormatError);
  CHECK_THROWS_AS(r.vector("mat"), FormatError);
  CHECK_THROWS_AS(r.vector("missing"), FormatError);
  CHECK_THROWS_AS(r.meta("missing"), FormatError);
  std::remove(p.c_str());
}

TEST_CASE("shortest round-trip double formatting") {
  for (double x : {1.0 / 3.0, -0.0, 2.4, 1e-300, 6.02214076e23, 0.1}) {
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK_THROWS_AS(parse_double("1.2.3"), FormatError);
  CHECK_THROWS_AS(parse_double("abc"), FormatError);
}

}  // TEST_SUITE
