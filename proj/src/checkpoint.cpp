#include "navguide/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace navguide {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'I', 'F'};
constexpr std::uint16_t kVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

template <typename T>
void append(std::vector<std::uint8_t>& buf, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T consume(const std::vector<std::uint8_t>& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size()) throw std::runtime_error("checkpoint: truncated file");
  T v{};
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed) {
  static const auto table = make_crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  append<std::uint16_t>(buf, kVersion);
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.arch.n_w));
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.arch.ctx_dim));
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.arch.temb_dim));
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.arch.hidden_width));
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.arch.hidden_depth));
  append<double>(buf, ckpt.norm.r_max);
  append<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.sched.T));
  append<std::uint8_t>(buf, ckpt.sched.kind == ScheduleKind::kCosine ? 0 : 1);
  for (double b : ckpt.sched.beta) append<double>(buf, b);

  const std::uint64_t n_params = static_cast<std::uint64_t>(ckpt.arch.param_count());
  append<std::uint64_t>(buf, n_params);
  for (std::size_t l = 0; l < ckpt.params.weights.size(); ++l) {
    const auto& w = ckpt.params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        append<float>(buf, static_cast<float>(w(r, c)));
      }
    }
    const auto& b = ckpt.params.biases[l];
    for (Eigen::Index i = 0; i < b.size(); ++i) append<float>(buf, static_cast<float>(b(i)));
  }

  append<std::uint32_t>(buf, crc32(buf.data(), buf.size()));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("save_checkpoint: write failed on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 4 + sizeof(std::uint32_t)) {
    throw std::runtime_error("load_checkpoint: truncated file " + path);
  }

  std::size_t off = buf.size() - sizeof(std::uint32_t);
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, buf.data() + off, sizeof(stored_crc));
  if (crc32(buf.data(), off) != stored_crc) {
    throw std::runtime_error("load_checkpoint: CRC mismatch in " + path);
  }

  off = 0;
  char magic[4];
  std::memcpy(magic, buf.data(), 4);
  off = 4;
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  }
  if (consume<std::uint16_t>(buf, off) != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version");
  }

  Checkpoint ckpt;
  ckpt.arch.n_w = static_cast<int>(consume<std::uint32_t>(buf, off));
  ckpt.arch.ctx_dim = static_cast<int>(consume<std::uint32_t>(buf, off));
  ckpt.arch.temb_dim = static_cast<int>(consume<std::uint32_t>(buf, off));
  ckpt.arch.hidden_width = static_cast<int>(consume<std::uint32_t>(buf, off));
  ckpt.arch.hidden_depth = static_cast<int>(consume<std::uint32_t>(buf, off));
  ckpt.norm.r_max = consume<double>(buf, off);

  const int T = static_cast<int>(consume<std::uint32_t>(buf, off));
  const auto kind_byte = consume<std::uint8_t>(buf, off);
  if (T < 1) throw std::runtime_error("load_checkpoint: bad schedule length");
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (auto& b : betas) b = consume<double>(buf, off);
  // derived coefficients are rebuilt from the stored betas, matching training
  // exactly
  ckpt.sched = schedule_from_betas(
      std::move(betas), kind_byte == 0 ? ScheduleKind::kCosine : ScheduleKind::kLinear);

  const std::uint64_t n_params = consume<std::uint64_t>(buf, off);
  if (n_params != static_cast<std::uint64_t>(ckpt.arch.param_count())) {
    throw std::runtime_error("load_checkpoint: payload length does not match descriptor");
  }

  ckpt.params.arch = ckpt.arch;
  std::vector<std::pair<int, int>> shapes;
  shapes.emplace_back(ckpt.arch.hidden_width, ckpt.arch.input_dim());
  for (int i = 1; i < ckpt.arch.hidden_depth; ++i) {
    shapes.emplace_back(ckpt.arch.hidden_width, ckpt.arch.hidden_width);
  }
  shapes.emplace_back(ckpt.arch.output_dim(), ckpt.arch.hidden_width);
  for (const auto& [rows, cols] : shapes) {
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = consume<float>(buf, off);
    }
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) b(r) = consume<float>(buf, off);
    ckpt.params.weights.push_back(std::move(w));
    ckpt.params.biases.push_back(std::move(b));
  }
  if (off != buf.size() - sizeof(std::uint32_t)) {
    throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
  }
  return ckpt;
}

}  // namespace navguide
