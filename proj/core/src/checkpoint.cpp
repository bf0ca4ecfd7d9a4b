#include "edr/checkpoint.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "edr/errors.hpp"

namespace edr {
namespace {

void put(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void put_stats(std::string& out, std::string_view key, const std::optional<ColumnStats>& s) {
  out += key;
  if (!s) {
    out += " none\n";
    return;
  }
  out += ' ';
  out += std::to_string(s->mean.size());
  for (double v : s->mean) {
    out += ' ';
    put(out, v);
  }
  for (double v : s->scale) {
    out += ' ';
    put(out, v);
  }
  out += '\n';
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::string_view token() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("unexpected end of checkpoint");
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    const auto got = token();
    if (got != word) fail("expected '" + std::string(word) + "', found '" + std::string(got) + "'");
  }

  double number() {
    const auto t = token();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail("malformed number '" + std::string(t) + "'");
    }
    return v;
  }

  std::size_t count() {
    const auto t = token();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail("malformed count '" + std::string(t) + "'");
    }
    return v;
  }

  /// Rest of the current line, trimmed of surrounding blanks.
  std::vector<std::string_view> line_tokens() {
    std::vector<std::string_view> out;
    while (pos_ < text_.size() && text_[pos_] != '\n') {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        continue;
      }
      const std::size_t start = pos_;
      while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      out.push_back(text_.substr(start, pos_ - start));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("checkpoint: " + what + " (line " + std::to_string(line_) + ")", line_, 0);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::optional<ColumnStats> read_stats(Reader& r, std::string_view key) {
  r.expect(key);
  const auto head = r.token();
  if (head == "none") return std::nullopt;
  std::size_t k = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), k);
  if (ec != std::errc() || ptr != head.data() + head.size()) r.fail("malformed stats header");
  ColumnStats s;
  for (std::size_t i = 0; i < k; ++i) s.mean.push_back(r.number());
  for (std::size_t i = 0; i < k; ++i) s.scale.push_back(r.number());
  return s;
}

}  // namespace

Checkpoint make_checkpoint(const Mlp& net, const Dataset& train) {
  return Checkpoint{net.config(), net.store().values, train.feature_stats, train.target_stats};
}

Mlp restore_network(const Checkpoint& ckpt) { return Mlp(ckpt.config, ckpt.parameters); }

std::string serialize(const Checkpoint& ckpt) {
  const MlpConfig& c = ckpt.config;
  std::string out = "edr-checkpoint " + std::to_string(kCheckpointVersion) + "\n";
  out += "input_dim " + std::to_string(c.input_dim) + "\n";
  out += "hidden";
  for (auto w : c.hidden_layers) out += " " + std::to_string(w);
  out += "\n";
  out += "targets " + std::to_string(c.targets) + "\n";
  out += "head " + std::string(to_string(c.head)) + "\n";
  out += "activation " + std::string(to_string(c.activation)) + "\n";
  out += "dropout_p ";
  put(out, c.dropout_p);
  out += "\n";
  put_stats(out, "feature_stats", ckpt.feature_stats);
  put_stats(out, "target_stats", ckpt.target_stats);
  out += "parameters " + std::to_string(ckpt.parameters.size()) + "\n";
  for (double v : ckpt.parameters) {
    put(out, v);
    out += '\n';
  }
  out += "end\n";
  return out;
}

Checkpoint deserialize(std::string_view text) {
  Reader r(text);
  r.expect("edr-checkpoint");
  const std::size_t version = r.count();
  if (version != static_cast<std::size_t>(kCheckpointVersion)) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  Checkpoint ckpt;
  MlpConfig& c = ckpt.config;
  r.expect("input_dim");
  c.input_dim = r.count();
  r.expect("hidden");
  c.hidden_layers.clear();
  for (auto tok : r.line_tokens()) {
    std::size_t w = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), w);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) r.fail("malformed hidden width");
    c.hidden_layers.push_back(w);
  }
  r.expect("targets");
  c.targets = r.count();
  r.expect("head");
  try {
    c.head = parse_head(r.token());
    r.expect("activation");
    c.activation = parse_activation(r.token());
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  r.expect("dropout_p");
  c.dropout_p = r.number();
  ckpt.feature_stats = read_stats(r, "feature_stats");
  ckpt.target_stats = read_stats(r, "target_stats");
  r.expect("parameters");
  const std::size_t n = r.count();
  ckpt.parameters.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ckpt.parameters.push_back(r.number());
  r.expect("end");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out << serialize(ckpt);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace edr
