#include "sparsewalk/learn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sparsewalk::learn {

namespace {

constexpr char kMagic[4] = {'S', 'W', 'C', 'K'};

template <class T>
void put(std::string& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string bytes(std::uint64_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) {
      throw std::runtime_error("checkpoint is truncated");
    }
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

std::string header_bytes() { return std::string(kMagic, 4); }

void read_header(Reader& in) {
  if (in.bytes(4) != header_bytes()) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint '" + path + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string encode_checkpoint(const PolicyParams& params, const std::string& config_text) {
  std::string out = header_bytes();
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, config_text.size());
  out += config_text;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(2 * params.actor.num_layers() +
                                                     2 * params.critic.num_layers() + 1));
  for_each_tensor(params, [&](const std::string& name, const Matrix& m) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, 2);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        put<double>(out, m(r, c));
      }
    }
  });
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes, const PolicyLayout& layout) {
  Reader in(bytes);
  read_header(in);
  Checkpoint ck;
  ck.config_text = in.bytes(in.get<std::uint64_t>());

  ck.params = make_zero_policy(layout);
  const auto count = in.get<std::uint32_t>();
  const auto expected = static_cast<std::uint32_t>(2 * ck.params.actor.num_layers() +
                                                   2 * ck.params.critic.num_layers() + 1);
  if (count != expected) {
    throw ShapeMismatchError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                             std::to_string(expected));
  }
  for_each_tensor(ck.params, [&](const std::string& name, Matrix& m) {
    const std::string stored = in.bytes(in.get<std::uint32_t>());
    if (stored != name) {
      throw ShapeMismatchError("checkpoint tensor '" + stored + "' where '" + name +
                               "' was expected");
    }
    const auto rank = in.get<std::uint32_t>();
    if (rank != 2) {
      throw ShapeMismatchError("tensor '" + name + "' has rank " + std::to_string(rank));
    }
    const auto rows = in.get<std::uint64_t>();
    const auto cols = in.get<std::uint64_t>();
    if (rows != static_cast<std::uint64_t>(m.rows()) ||
        cols != static_cast<std::uint64_t>(m.cols())) {
      throw ShapeMismatchError("tensor '" + name + "' is " + std::to_string(rows) + "x" +
                               std::to_string(cols) + ", expected " + std::to_string(m.rows()) +
                               "x" + std::to_string(m.cols()));
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = in.get<double>();
      }
    }
  });
  if (!in.at_end()) {
    throw std::runtime_error("trailing bytes after the last checkpoint tensor");
  }
  check_layout(ck.params, layout);
  return ck;
}

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& config_text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint '" + path + "'");
  }
  const std::string bytes = encode_checkpoint(params, config_text);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("failed writing checkpoint '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path, const PolicyLayout& layout) {
  return decode_checkpoint(read_file(path), layout);
}

std::string read_checkpoint_config(const std::string& path) {
  const std::string data = read_file(path);
  Reader in(data);
  read_header(in);
  return in.bytes(in.get<std::uint64_t>());
}

}  // namespace sparsewalk::learn
