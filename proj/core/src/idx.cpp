#include "langevin/idx.hpp"

#include <cstdio>
#include <vector>

namespace langevin {

namespace {

std::vector<unsigned char> read_all(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IdxError(IdxErrorKind::truncated, 0, "cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<unsigned char> buf(static_cast<std::size_t>(size));
  if (size > 0 && std::fread(buf.data(), 1, buf.size(), f) != buf.size()) {
    std::fclose(f);
    throw IdxError(IdxErrorKind::truncated, 0, "short read on " + path);
  }
  std::fclose(f);
  return buf;
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t off,
                   const std::string& path) {
  if (off + 4 > buf.size())
    throw IdxError(IdxErrorKind::truncated, static_cast<long long>(buf.size()),
                   path + ": truncated at byte " + std::to_string(buf.size()) +
                       " while reading header");
  return (std::uint32_t(buf[off]) << 24) | (std::uint32_t(buf[off + 1]) << 16) |
         (std::uint32_t(buf[off + 2]) << 8) | std::uint32_t(buf[off + 3]);
}

}  // namespace

LogisticData load_idx(const std::string& images_path,
                      const std::string& labels_path,
                      std::pair<int, int> keep_digits) {
  if (keep_digits.first == keep_digits.second)
    throw std::invalid_argument("load_idx: keep digits must be two distinct values");
  int lo = std::min(keep_digits.first, keep_digits.second);
  int hi = std::max(keep_digits.first, keep_digits.second);
  if (lo < 0 || hi > 9)
    throw std::invalid_argument("load_idx: keep digits must be in 0..9");

  auto img = read_all(images_path);
  auto lab = read_all(labels_path);

  std::uint32_t img_magic = be32(img, 0, images_path);
  if (img_magic != 0x00000803u)
    throw IdxError(IdxErrorKind::bad_magic, 0,
                   images_path + ": bad magic at byte 0 (expected 0x00000803)");
  std::uint32_t lab_magic = be32(lab, 0, labels_path);
  if (lab_magic != 0x00000801u)
    throw IdxError(IdxErrorKind::bad_magic, 0,
                   labels_path + ": bad magic at byte 0 (expected 0x00000801)");

  std::uint32_t n_img = be32(img, 4, images_path);
  std::uint32_t rows = be32(img, 8, images_path);
  std::uint32_t cols = be32(img, 12, images_path);
  std::uint32_t n_lab = be32(lab, 4, labels_path);

  if (n_img != n_lab)
    throw IdxError(IdxErrorKind::count_mismatch, 4,
                   "image count " + std::to_string(n_img) + " != label count " +
                       std::to_string(n_lab) + " (headers at byte 4)");

  const std::size_t pixels = std::size_t(rows) * cols;
  const std::size_t img_need = 16 + std::size_t(n_img) * pixels;
  if (img.size() < img_need)
    throw IdxError(IdxErrorKind::truncated, static_cast<long long>(img.size()),
                   images_path + ": payload truncated at byte " +
                       std::to_string(img.size()) + " (need " +
                       std::to_string(img_need) + ")");
  const std::size_t lab_need = 8 + std::size_t(n_lab);
  if (lab.size() < lab_need)
    throw IdxError(IdxErrorKind::truncated, static_cast<long long>(lab.size()),
                   labels_path + ": payload truncated at byte " +
                       std::to_string(lab.size()) + " (need " +
                       std::to_string(lab_need) + ")");

  LogisticData data;
  data.n_features = pixels;
  for (std::uint32_t j = 0; j < n_img; ++j) {
    int digit = lab[8 + j];
    if (digit != lo && digit != hi) continue;
    const unsigned char* px = img.data() + 16 + std::size_t(j) * pixels;
    for (std::size_t i = 0; i < pixels; ++i)
      data.features.push_back(px[i] / 255.0);
    data.labels.push_back(digit == hi ? 1 : 0);
  }
  if (data.labels.empty())
    throw std::invalid_argument("load_idx: no rows with the requested digits");
  return data;
}

}  // namespace langevin
