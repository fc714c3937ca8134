#pragma once

// CNN topology descriptions and their text format.
//
//   network vgg-a
//   input 224x224x3
//   conv 3x3,64 @224          # Kx x Ky, No [/stride] [(t)] [@size] [in=Ni] [skip=p]
//   pool 2x2/2
//   spp 7,3,2,1
//   fc 4096 (2)
//
// A block with (t) stands for t identical layers. "@size" and "in=Ni" are
// optional assertions checked against the chain. "skip=p" marks residual
// inputs: layer k of the block (0-based) receives a forwarded input when
// k % 2 == p.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "newton/error.hpp"

namespace newton {

enum class LayerKind { conv, fc, pool, spp };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::pool: return "pool";
    case LayerKind::spp: return "spp";
  }
  return "?";
}

// One line of a network file.
struct LayerBlock {
  LayerKind kind = LayerKind::conv;
  unsigned kx = 1, ky = 1;
  unsigned no = 0;  // output channels (conv) or neurons (fc)
  unsigned stride = 1;
  unsigned repeat = 1;
  std::optional<unsigned> assert_size;  // expected input width
  std::optional<unsigned> assert_in;    // expected input channels / features
  std::optional<unsigned> skip_phase;
  std::vector<unsigned> spp_levels;
  std::size_t line = 0;  // source line, 0 if built in code

  friend bool operator==(const LayerBlock& a, const LayerBlock& b) {
    return a.kind == b.kind && a.kx == b.kx && a.ky == b.ky && a.no == b.no &&
           a.stride == b.stride && a.repeat == b.repeat &&
           a.assert_size == b.assert_size && a.assert_in == b.assert_in &&
           a.skip_phase == b.skip_phase && a.spp_levels == b.spp_levels;
  }
};

// A single expanded layer with resolved dimensions.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::conv;
  unsigned kx = 1, ky = 1;
  unsigned ni = 0;  // input channels (conv/pool) or flattened inputs (fc)
  unsigned no = 0;
  unsigned stride = 1;
  unsigned input_w = 1, input_h = 1;
  unsigned repeat = 1;  // always 1 once expanded
  bool skip_input = false;

  unsigned output_w() const { return (input_w + stride - 1) / stride; }
  unsigned output_h() const { return (input_h + stride - 1) / stride; }
  // Sliding-window positions per image.
  std::uint64_t steps() const {
    return kind == LayerKind::fc ? 1 : std::uint64_t{output_w()} * output_h();
  }
  std::uint64_t weight_rows() const {
    return kind == LayerKind::fc ? ni : std::uint64_t{kx} * ky * ni;
  }
  std::uint64_t weight_cols() const { return no; }
  std::uint64_t macs() const { return steps() * weight_rows() * weight_cols(); }
  bool has_weights() const {
    return kind == LayerKind::conv || kind == LayerKind::fc;
  }
};

struct NetworkDesc {
  std::string name;
  unsigned input_w = 224, input_h = 224, input_c = 3;
  std::vector<LayerBlock> blocks;

  friend bool operator==(const NetworkDesc&, const NetworkDesc&) = default;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '#') {
      ++j;
    }
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

// Strict unsigned parse of the whole string.
inline std::optional<unsigned> parse_uint(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

class LineParser {
 public:
  LineParser(std::size_t line, const Token& tok) : line_(line), tok_(tok) {}

  [[noreturn]] void fail(const std::string& msg, std::size_t offset = 0) const {
    throw ParseError(msg, line_, tok_.column + offset);
  }

  unsigned number(std::string_view s, std::size_t offset,
                  const char* what) const {
    auto v = parse_uint(s);
    if (!v || *v == 0) {
      fail(std::string("expected positive integer for ") + what + ", got '" +
               std::string(s) + "'",
           offset);
    }
    return *v;
  }

  // "KxK" at the start of the token; returns offset after it.
  std::size_t kernel(std::string_view s, unsigned& kx, unsigned& ky) const {
    const auto x = s.find('x');
    if (x == std::string_view::npos) fail("expected kernel KxK");
    std::size_t end = x + 1;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    kx = number(s.substr(0, x), 0, "kernel width");
    ky = number(s.substr(x + 1, end - x - 1), x + 1, "kernel height");
    return end;
  }

 private:
  std::size_t line_;
  const Token& tok_;
};

inline void parse_modifiers(LayerBlock& b, const std::vector<Token>& toks,
                            std::size_t first, std::size_t line) {
  for (std::size_t k = first; k < toks.size(); ++k) {
    const auto& t = toks[k];
    LineParser p(line, t);
    const std::string& s = t.text;
    if (s.size() >= 3 && s.front() == '(' && s.back() == ')') {
      b.repeat = p.number(std::string_view(s).substr(1, s.size() - 2), 1,
                          "repeat count");
    } else if (s.front() == '@') {
      b.assert_size = p.number(std::string_view(s).substr(1), 1, "input size");
    } else if (s.rfind("in=", 0) == 0) {
      b.assert_in = p.number(std::string_view(s).substr(3), 3, "input channels");
    } else if (s.rfind("skip=", 0) == 0) {
      auto v = parse_uint(std::string_view(s).substr(5));
      if (!v || *v > 1) p.fail("skip phase must be 0 or 1", 5);
      b.skip_phase = *v;
    } else {
      p.fail("unexpected token '" + s + "'");
    }
  }
}

}  // namespace detail

inline NetworkDesc parse_network(std::istream& in) {
  NetworkDesc net;
  bool have_name = false, have_input = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto toks = detail::tokenize(raw);
    if (toks.empty()) continue;
    const auto& head = toks[0];
    auto need = [&](std::size_t n) {
      if (toks.size() < n) {
        throw ParseError("'" + head.text + "' needs an argument", line_no,
                         head.column + head.text.size());
      }
    };

    if (head.text == "network") {
      need(2);
      if (toks.size() > 2) {
        throw ParseError("unexpected token '" + toks[2].text + "'", line_no,
                         toks[2].column);
      }
      net.name = toks[1].text;
      have_name = true;
    } else if (head.text == "input") {
      need(2);
      detail::LineParser p(line_no, toks[1]);
      const auto& s = toks[1].text;
      const auto a = s.find('x');
      const auto b = a == std::string::npos ? a : s.find('x', a + 1);
      if (b == std::string::npos) p.fail("expected input WxHxC");
      net.input_w = p.number(std::string_view(s).substr(0, a), 0, "input width");
      net.input_h = p.number(std::string_view(s).substr(a + 1, b - a - 1), a + 1,
                             "input height");
      net.input_c = p.number(std::string_view(s).substr(b + 1), b + 1,
                             "input channels");
      have_input = true;
    } else if (head.text == "conv") {
      need(2);
      LayerBlock blk;
      blk.kind = LayerKind::conv;
      blk.line = line_no;
      detail::LineParser p(line_no, toks[1]);
      const std::string_view s = toks[1].text;
      std::size_t pos = p.kernel(s, blk.kx, blk.ky);
      if (pos >= s.size() || s[pos] != ',') p.fail("expected ',No' after kernel", pos);
      const auto slash = s.find('/', pos);
      const auto no_end = slash == std::string_view::npos ? s.size() : slash;
      blk.no = p.number(s.substr(pos + 1, no_end - pos - 1), pos + 1,
                        "output channels");
      if (slash != std::string_view::npos) {
        blk.stride = p.number(s.substr(slash + 1), slash + 1, "stride");
      }
      detail::parse_modifiers(blk, toks, 2, line_no);
      net.blocks.push_back(blk);
    } else if (head.text == "pool") {
      need(2);
      LayerBlock blk;
      blk.kind = LayerKind::pool;
      blk.line = line_no;
      detail::LineParser p(line_no, toks[1]);
      const std::string_view s = toks[1].text;
      std::size_t pos = p.kernel(s, blk.kx, blk.ky);
      if (pos >= s.size() || s[pos] != '/') p.fail("expected '/stride' after pool kernel", pos);
      blk.stride = p.number(s.substr(pos + 1), pos + 1, "stride");
      detail::parse_modifiers(blk, toks, 2, line_no);
      net.blocks.push_back(blk);
    } else if (head.text == "spp") {
      need(2);
      LayerBlock blk;
      blk.kind = LayerKind::spp;
      blk.line = line_no;
      detail::LineParser p(line_no, toks[1]);
      std::string_view s = toks[1].text;
      std::size_t start = 0;
      while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string_view::npos ? s.size() : comma;
        blk.spp_levels.push_back(p.number(s.substr(start, end - start), start,
                                          "pyramid level"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      detail::parse_modifiers(blk, toks, 2, line_no);
      net.blocks.push_back(blk);
    } else if (head.text == "fc") {
      need(2);
      LayerBlock blk;
      blk.kind = LayerKind::fc;
      blk.line = line_no;
      detail::LineParser p(line_no, toks[1]);
      blk.no = p.number(toks[1].text, 0, "fc width");
      detail::parse_modifiers(blk, toks, 2, line_no);
      net.blocks.push_back(blk);
    } else {
      throw ParseError("unknown directive '" + head.text + "'", line_no,
                       head.column);
    }
  }
  if (line_no == 0 && net.blocks.empty() && !have_name) {
    throw ParseError("empty network description", 1, 1);
  }
  if (!have_name) throw ParseError("missing 'network' line", line_no, 1);
  if (!have_input) throw ParseError("missing 'input' line", line_no, 1);
  if (net.blocks.empty()) throw ParseError("network has no layers", line_no, 1);
  return net;
}

inline NetworkDesc parse_network(const std::string& text) {
  std::istringstream in(text);
  return parse_network(in);
}

inline std::string serialize_network(const NetworkDesc& net) {
  std::ostringstream out;
  out << "network " << net.name << "\n";
  out << "input " << net.input_w << "x" << net.input_h << "x" << net.input_c
      << "\n";
  for (const auto& b : net.blocks) {
    out << to_string(b.kind) << " ";
    switch (b.kind) {
      case LayerKind::conv:
        out << b.kx << "x" << b.ky << "," << b.no;
        if (b.stride != 1) out << "/" << b.stride;
        break;
      case LayerKind::pool:
        out << b.kx << "x" << b.ky << "/" << b.stride;
        break;
      case LayerKind::spp:
        for (std::size_t i = 0; i < b.spp_levels.size(); ++i) {
          out << (i ? "," : "") << b.spp_levels[i];
        }
        break;
      case LayerKind::fc:
        out << b.no;
        break;
    }
    if (b.repeat != 1) out << " (" << b.repeat << ")";
    if (b.assert_size) out << " @" << *b.assert_size;
    if (b.assert_in) out << " in=" << *b.assert_in;
    if (b.skip_phase) out << " skip=" << *b.skip_phase;
    out << "\n";
  }
  return out.str();
}

// Expands repeats and resolves every layer's input dimensions. Throws
// ChainError when an assertion or the chain itself is inconsistent.
inline std::vector<LayerDesc> expand_layers(const NetworkDesc& net) {
  std::vector<LayerDesc> out;
  unsigned w = net.input_w, h = net.input_h, c = net.input_c;
  bool flat = false;
  unsigned n_conv = 0, n_fc = 0, n_pool = 0;
  std::string prev = "input";

  auto where = [](const LayerBlock& b) {
    return b.line ? " (line " + std::to_string(b.line) + ")" : std::string();
  };

  for (const auto& b : net.blocks) {
    for (unsigned k = 0; k < b.repeat; ++k) {
      LayerDesc l;
      l.kind = b.kind;
      l.kx = b.kx;
      l.ky = b.ky;
      l.stride = b.stride;
      l.no = b.no;
      l.input_w = w;
      l.input_h = h;
      switch (b.kind) {
        case LayerKind::conv: l.name = "conv" + std::to_string(++n_conv); break;
        case LayerKind::fc: l.name = "fc" + std::to_string(++n_fc); break;
        default: l.name = "pool" + std::to_string(++n_pool); break;
      }
      if (b.kind != LayerKind::fc && flat) {
        throw ChainError(prev + " -> " + l.name + where(b) +
                         ": spatial layer after a flattened vector");
      }
      if (b.assert_size && k == 0 && *b.assert_size != w) {
        throw ChainError(prev + " -> " + l.name + where(b) + ": " + prev +
                         " produces " + std::to_string(w) + "x" +
                         std::to_string(h) + ", " + l.name + " expects " +
                         std::to_string(*b.assert_size));
      }
      const unsigned features = b.kind == LayerKind::fc ? w * h * c : c;
      if (b.assert_in && k == 0 && *b.assert_in != features) {
        throw ChainError(prev + " -> " + l.name + where(b) + ": " + prev +
                         " produces " + std::to_string(features) +
                         " channels, " + l.name + " expects " +
                         std::to_string(*b.assert_in));
      }
      l.ni = features;
      switch (b.kind) {
        case LayerKind::conv:
          l.skip_input = b.skip_phase && k % 2 == *b.skip_phase;
          w = l.output_w();
          h = l.output_h();
          c = b.no;
          break;
        case LayerKind::pool:
          l.no = c;
          w = l.output_w();
          h = l.output_h();
          break;
        case LayerKind::spp: {
          unsigned bins = 0;
          for (auto lv : b.spp_levels) bins += lv * lv;
          l.no = bins * c;
          l.stride = 1;
          c = l.no;
          w = h = 1;
          flat = true;
          break;
        }
        case LayerKind::fc:
          l.input_w = l.input_h = 1;
          c = b.no;
          w = h = 1;
          flat = true;
          break;
      }
      prev = l.name;
      out.push_back(l);
    }
  }
  return out;
}

inline void validate_network(const NetworkDesc& net) { (void)expand_layers(net); }

inline NetworkDesc load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file '" + path + "'");
  auto net = parse_network(in);
  validate_network(net);
  return net;
}

// Same topology at a different square input size. Size assertions scale
// with the input and are dropped if they stop being integral. Flattened
// input counts change with the image, so fc assertions are dropped.
inline NetworkDesc with_input_size(NetworkDesc net, unsigned size) {
  const unsigned old = net.input_w;
  net.input_w = net.input_h = size;
  for (auto& b : net.blocks) {
    if (b.kind == LayerKind::fc) b.assert_in.reset();
    if (!b.assert_size) continue;
    const std::uint64_t scaled = std::uint64_t{*b.assert_size} * size;
    if (scaled % old == 0) {
      b.assert_size = static_cast<unsigned>(scaled / old);
    } else {
      b.assert_size.reset();
    }
  }
  // Ceil-division along the chain does not always scale exactly.
  try {
    validate_network(net);
  } catch (const ChainError&) {
    for (auto& b : net.blocks) b.assert_size.reset();
  }
  return net;
}

}  // namespace newton
