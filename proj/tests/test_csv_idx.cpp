#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "langevin/csv.hpp"
#include "langevin/idx.hpp"

using namespace langevin;

TEST_CASE("fmt17: decimal text round-trips to the identical double") {
  const double values[] = {0.1,       1.0 / 3.0, 1e-300,       -2.5e17,
                           3.14159,   0.0,       5e-324,       1.7976931348623157e308,
                           -0.499999999999999944};
  for (double v : values) {
    const std::string s = fmt17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(fmt17(0.5) == "0.5");
  CHECK(fmt17(2.0) == "2");
}

TEST_CASE("csv writer: single header, enforced column counts, newline rows") {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.row({"1", "2"});
  w.row({fmt17(0.25), "x"});
  CHECK(os.str() == "a,b\n1,2\n0.25,x\n");
  CHECK_THROWS_AS(w.row({"only-one"}), std::invalid_argument);
}

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

struct IdxFixture {
  std::string dir;
  std::string images;
  std::string labels;

  IdxFixture() {
    dir = "idx_fixture_XXXXXX";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s", dir.c_str());
    REQUIRE(mkdtemp(buf) != nullptr);
    dir = buf;
    images = dir + "/img.idx";
    labels = dir + "/lab.idx";
  }
  ~IdxFixture() {
    std::remove(images.c_str());
    std::remove(labels.c_str());
    std::remove(dir.c_str());
  }

  void write(const std::string& path, const std::string& bytes) const {
    std::ofstream f(path, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  // Three 2x2 images with labels {3, 7, 3}.
  void write_standard() const {
    std::string img;
    put_u32_be(img, 0x00000803);
    put_u32_be(img, 3);  // count
    put_u32_be(img, 2);  // rows
    put_u32_be(img, 2);  // cols
    const unsigned char px[12] = {0, 51, 102, 153,  204, 255, 0, 255,
                                  25, 75, 125, 175};
    img.append(reinterpret_cast<const char*>(px), 12);
    write(images, img);

    std::string lab;
    put_u32_be(lab, 0x00000801);
    put_u32_be(lab, 3);
    lab.push_back(3);
    lab.push_back(7);
    lab.push_back(3);
    write(labels, lab);
  }
};

}  // namespace

TEST_CASE("idx loader: byte-level fixture decodes, filters and rescales") {
  IdxFixture fx;
  fx.write_standard();

  auto data = load_idx(fx.images, fx.labels, {3, 7});
  REQUIRE(data.size() == 3);
  REQUIRE(data.n_features == 4);
  // Pixels scaled by 1/255, row-major.
  CHECK(data.row(0)[0] == doctest::Approx(0.0));
  CHECK(data.row(0)[1] == doctest::Approx(51.0 / 255.0));
  CHECK(data.row(1)[1] == doctest::Approx(1.0));
  CHECK(data.row(2)[3] == doctest::Approx(175.0 / 255.0));
  // Smaller kept digit maps to 0, larger to 1.
  CHECK(data.labels == std::vector<std::uint8_t>{0, 1, 0});

  auto only3 = load_idx(fx.images, fx.labels, {3, 9});
  REQUIRE(only3.size() == 2);
  CHECK(only3.labels == std::vector<std::uint8_t>{0, 0});
  CHECK(only3.row(1)[0] == doctest::Approx(25.0 / 255.0));
}

TEST_CASE("idx loader: wrong magic is reported at offset zero") {
  IdxFixture fx;
  fx.write_standard();
  std::string bad;
  put_u32_be(bad, 0x00000802);
  put_u32_be(bad, 3);
  put_u32_be(bad, 2);
  put_u32_be(bad, 2);
  bad.append(12, '\0');
  fx.write(fx.images, bad);
  try {
    load_idx(fx.images, fx.labels, {3, 7});
    FAIL("expected IdxError");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxErrorKind::bad_magic);
    CHECK(e.offset == 0);
  }
}

TEST_CASE("idx loader: truncated pixel payload points at the break") {
  IdxFixture fx;
  fx.write_standard();
  std::string img;
  put_u32_be(img, 0x00000803);
  put_u32_be(img, 3);
  put_u32_be(img, 2);
  put_u32_be(img, 2);
  img.append(7, '\x10');  // needs 12 pixel bytes, supplies 7
  fx.write(fx.images, img);
  try {
    load_idx(fx.images, fx.labels, {3, 7});
    FAIL("expected IdxError");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxErrorKind::truncated);
    CHECK(e.offset == 16 + 7);
  }
}

TEST_CASE("idx loader: image/label count mismatch is its own error") {
  IdxFixture fx;
  fx.write_standard();
  std::string lab;
  put_u32_be(lab, 0x00000801);
  put_u32_be(lab, 2);
  lab.push_back(3);
  lab.push_back(7);
  fx.write(fx.labels, lab);
  try {
    load_idx(fx.images, fx.labels, {3, 7});
    FAIL("expected IdxError");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxErrorKind::count_mismatch);
  }
}

TEST_CASE("idx loader: keeping digits absent from the data is an error") {
  IdxFixture fx;
  fx.write_standard();
  CHECK_THROWS_AS(load_idx(fx.images, fx.labels, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(load_idx(fx.images, fx.labels, {3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(load_idx(fx.images, fx.labels, {3, 12}), std::invalid_argument);
}
