#include "gamtalk/text/graph_text.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

#include "gamtalk/error.hpp"
#include "gamtalk/text/number_format.hpp"

namespace gamtalk::text {
namespace {

constexpr std::string_view kNameField = "Feature Name: ";
constexpr std::string_view kTypeField = "Feature Type: ";
constexpr std::string_view kMeansField = "Means: ";
constexpr std::string_view kLowerField =
    "Lower Bounds (95%-Confidence Interval): ";
constexpr std::string_view kUpperField =
    "Upper Bounds (95%-Confidence Interval): ";
constexpr std::string_view kWeightsField = "Weights: ";

[[noreturn]] void parse_error(const std::string& message) {
  throw Error(ErrorCode::kParse, message);
}

void append_json_string(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('"');
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xF]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

std::string interval_key(double lo, double hi, int decimals) {
  return "(" + format_rounded(lo, decimals) + ", " +
         format_rounded(hi, decimals) + ")";
}

// Minimal reader for the flat {"key": number, ...} objects emitted above.
class ObjectReader {
 public:
  explicit ObjectReader(std::string_view text) : s_(text) {}

  std::vector<std::pair<std::string, double>> read() {
    std::vector<std::pair<std::string, double>> out;
    skip_ws();
    expect('{');
    skip_ws();
    if (peek() == '}') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        std::string key = read_string();
        skip_ws();
        expect(':');
        skip_ws();
        double value = read_number();
        out.emplace_back(std::move(key), value);
        skip_ws();
        const char c = next();
        if (c == '}') break;
        if (c != ',') parse_error("expected ',' or '}' in graph object");
      }
    }
    skip_ws();
    if (pos_ != s_.size()) parse_error("trailing characters after graph object");
    return out;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char next() {
    if (pos_ >= s_.size()) parse_error("unexpected end of graph object");
    return s_[pos_++];
  }
  void expect(char c) {
    if (next() != c) parse_error(std::string("expected '") + c + "' in graph object");
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::uint32_t read_hex4() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const char c = next();
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
      else parse_error("bad \\u escape in graph key");
    }
    return v;
  }

  std::string read_string() {
    expect('"');
    std::string out;
    while (true) {
      const char c = next();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      const char e = next();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'u': {
          std::uint32_t cp = read_hex4();
          if (cp >= 0xD800 && cp < 0xDC00) {
            expect('\\');
            expect('u');
            const std::uint32_t low = read_hex4();
            cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
          }
          append_utf8(out, cp);
          break;
        }
        default:
          parse_error("bad escape in graph key");
      }
    }
  }

  double read_number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.' ||
          c == 'e' || c == 'E') {
        ++pos_;
      } else {
        break;
      }
    }
    auto v = parse_double(s_.substr(start, pos_ - start));
    if (!v) parse_error("bad number in graph object");
    return *v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Interval {
  double lo;
  double hi;
};

Interval parse_interval_key(const std::string& key) {
  if (key.size() < 5 || key.front() != '(' || key.back() != ')') {
    parse_error("malformed interval key '" + key + "'");
  }
  const std::string_view inner(key.data() + 1, key.size() - 2);
  // Whitespace around the comma is optional on input.
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) {
    parse_error("malformed interval key '" + key + "'");
  }
  auto trim = [](std::string_view v) {
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    return v;
  };
  auto lo = parse_double(trim(inner.substr(0, comma)));
  auto hi = parse_double(trim(inner.substr(comma + 1)));
  if (!lo || !hi) parse_error("malformed interval key '" + key + "'");
  if (!(*lo < *hi)) parse_error("empty interval '" + key + "'");
  return {*lo, *hi};
}

std::vector<double> values_in_axis_order(
    const std::vector<std::pair<std::string, double>>& object,
    const std::vector<std::pair<std::string, double>>& means,
    std::string_view field) {
  if (object.size() != means.size()) {
    parse_error("mismatched axes between Means and " + std::string(field));
  }
  std::vector<double> out;
  out.reserve(object.size());
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (object[i].first != means[i].first) {
      parse_error("mismatched axes between Means and " + std::string(field));
    }
    out.push_back(object[i].second);
  }
  return out;
}

}  // namespace

void RenderOptions::validate() const {
  if (decimals < 0 || decimals > 12) {
    throw Error(ErrorCode::kInvalidArgument, "decimals must lie in [0, 12]");
  }
}

std::string render_object(const gam::GraphTerm& term,
                          const std::vector<double>& values, int decimals) {
  std::string out = "{";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    if (term.is_continuous()) {
      append_json_string(out,
                         interval_key(term.edges[i], term.edges[i + 1], decimals));
    } else {
      append_json_string(out, term.labels[i]);
    }
    out += ": ";
    out += format_rounded(values[i], decimals);
  }
  out += "}";
  return out;
}

GraphText render_graph_text(const gam::GraphTerm& term,
                            const RenderOptions& opts) {
  opts.validate();
  std::string out;
  out += kNameField;
  out += term.feature_name;
  out += "\n\n";
  out += kTypeField;
  out += gam::to_string(term.kind);
  out += "\n\n";
  out += kMeansField;
  out += render_object(term, term.means, opts.decimals);
  if (opts.include_ci) {
    out += "\n\n";
    out += kLowerField;
    out += render_object(term, term.lower_ci, opts.decimals);
    out += "\n\n";
    out += kUpperField;
    out += render_object(term, term.upper_ci, opts.decimals);
  }
  if (opts.include_weights) {
    out += "\n\n";
    out += kWeightsField;
    out += render_object(term, term.weights, opts.decimals);
  }
  return {std::move(out)};
}

gam::GraphTerm parse_graph_text(const GraphText& text) {
  std::optional<std::string> name;
  std::optional<gam::FeatureKind> kind;
  std::optional<std::vector<std::pair<std::string, double>>> means, lower,
      upper, weights;

  std::string_view rest = text.text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    auto take = [&](std::string_view field) {
      if (line.substr(0, field.size()) != field) return false;
      line.remove_prefix(field.size());
      return true;
    };
    if (take(kNameField)) {
      name = std::string(line);
    } else if (take(kTypeField)) {
      kind = gam::feature_kind_from_string(line);
    } else if (take(kMeansField)) {
      means = ObjectReader(line).read();
    } else if (take(kLowerField)) {
      lower = ObjectReader(line).read();
    } else if (take(kUpperField)) {
      upper = ObjectReader(line).read();
    } else if (take(kWeightsField)) {
      weights = ObjectReader(line).read();
    } else {
      parse_error("unexpected line in graph text: '" + std::string(line) + "'");
    }
  }
  if (!name) parse_error("graph text lacks 'Feature Name'");
  if (!kind) parse_error("graph text lacks 'Feature Type'");
  if (!means) parse_error("graph text lacks 'Means'");
  if (lower.has_value() != upper.has_value()) {
    parse_error("graph text must carry both confidence bounds or neither");
  }
  if (means->empty()) parse_error("graph has no bins");

  gam::GraphTerm term;
  term.feature_name = *name;
  term.kind = *kind;
  for (const auto& [key, value] : *means) term.means.push_back(value);
  term.lower_ci = lower ? values_in_axis_order(*lower, *means, "Lower Bounds")
                        : term.means;
  term.upper_ci = upper ? values_in_axis_order(*upper, *means, "Upper Bounds")
                        : term.means;
  term.weights = weights ? values_in_axis_order(*weights, *means, "Weights")
                         : std::vector<double>(means->size(), 1.0);

  if (term.is_continuous()) {
    Interval prev{};
    for (std::size_t i = 0; i < means->size(); ++i) {
      const Interval cur = parse_interval_key((*means)[i].first);
      if (i == 0) {
        term.edges.push_back(cur.lo);
      } else if (cur.lo > prev.hi) {
        parse_error("gap in axis between " + (*means)[i - 1].first + " and " +
                    (*means)[i].first);
      } else if (cur.lo < prev.hi) {
        parse_error("overlapping intervals in axis at " + (*means)[i].first);
      }
      term.edges.push_back(cur.hi);
      prev = cur;
    }
  } else {
    for (const auto& [key, value] : *means) term.labels.push_back(key);
  }
  try {
    term.validate();
  } catch (const Error& e) {
    parse_error(std::string("invalid graph: ") + e.what());
  }
  return term;
}

gam::GraphTerm round_term(const gam::GraphTerm& term, const RenderOptions& opts) {
  gam::GraphTerm out = term;
  auto round_all = [&](std::vector<double>& values) {
    for (double& v : values) v = round_to(v, opts.decimals);
  };
  round_all(out.edges);
  round_all(out.means);
  if (opts.include_ci) {
    round_all(out.lower_ci);
    round_all(out.upper_ci);
  } else {
    out.lower_ci = out.means;
    out.upper_ci = out.means;
  }
  if (opts.include_weights) {
    round_all(out.weights);
  } else {
    out.weights.assign(out.means.size(), 1.0);
  }
  return out;
}

}  // namespace gamtalk::text
