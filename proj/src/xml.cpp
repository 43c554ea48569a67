// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/xml.hpp"

#include <cctype>
#include <charconv>

#include "pidgraph/errors.hpp"

namespace pidgraph::xml {

const std::string* Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string_view Element::local_name() const {
  std::string_view n = name;
  auto colon = n.find(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

namespace {

constexpr std::size_t kMaxDepth = 256;

class Reader {
 public:
  explicit Reader(std::string_view doc) : doc_(doc) {}

  Element document() {
    skip_prolog();
    if (eof() || peek() != '<') fail("expected root element");
    Element root = element(0);
    skip_misc();
    if (!eof()) fail("unexpected content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw PositionedError(ErrorKind::parse, "XML: " + message, line_, column_);
  }

  bool eof() const { return pos_ >= doc_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < doc_.size() ? doc_[pos_ + ahead] : '\0'; }
  bool looking_at(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < doc_.size(); ++i) {
      if (doc_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void expect(std::string_view s) {
    if (!looking_at(s)) fail("expected '" + std::string(s) + "'");
    advance(s.size());
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    while (!eof() && !looking_at(terminator)) advance();
    if (eof()) fail(std::string("unterminated ") + what);
    advance(terminator.size());
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (looking_at("<!--")) {
        advance(4);
        skip_until("-->", "comment");
      } else if (looking_at("<?")) {
        advance(2);
        skip_until("?>", "processing instruction");
      } else {
        return;
      }
    }
  }

  void skip_prolog() {
    if (looking_at("\xEF\xBB\xBF")) advance(3);
    while (true) {
      skip_misc();
      if (looking_at("<!DOCTYPE")) {
        int depth = 0;
        while (!eof()) {
          char c = peek();
          advance();
          if (c == '[') ++depth;
          if (c == ']') --depth;
          if (c == '>' && depth <= 0) break;
        }
        if (eof()) fail("unterminated DOCTYPE");
      } else {
        return;
      }
    }
  }

  static bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool name_char(char c) {
    return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
  }

  std::string name() {
    if (eof() || !name_start(peek())) fail("expected a name");
    auto start = pos_;
    while (!eof() && name_char(peek())) advance();
    return std::string(doc_.substr(start, pos_ - start));
  }

  void append_utf8(std::string& out, unsigned long cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid character reference");
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  void entity(std::string& out) {
    advance();  // '&'
    auto start = pos_;
    while (!eof() && peek() != ';' && pos_ - start < 12) advance();
    if (peek() != ';') fail("unterminated entity reference");
    auto ref = doc_.substr(start, pos_ - start);
    advance();
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (!ref.empty() && ref[0] == '#') {
      unsigned long cp = 0;
      std::from_chars_result r{};
      if (ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X')) {
        r = std::from_chars(ref.data() + 2, ref.data() + ref.size(), cp, 16);
      } else {
        r = std::from_chars(ref.data() + 1, ref.data() + ref.size(), cp, 10);
      }
      if (r.ec != std::errc{} || r.ptr != ref.data() + ref.size()) fail("malformed character reference");
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
  }

  std::string attribute_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    advance();
    std::string value;
    while (!eof() && peek() != quote) {
      if (peek() == '<') fail("'<' in attribute value");
      if (peek() == '&') {
        entity(value);
      } else {
        char c = peek();
        // Attribute-value normalization of literal whitespace.
        if (c == '\n' || c == '\t') c = ' ';
        if (c == '\r') {
          advance();
          if (peek() == '\n') continue;
          value += ' ';
          continue;
        }
        value += c;
        advance();
      }
    }
    if (eof()) fail("unterminated attribute value");
    advance();
    return value;
  }

  Element element(std::size_t depth) {
    if (depth > kMaxDepth) fail("element nesting too deep");
    Element el;
    el.line = line_;
    el.column = column_;
    expect("<");
    el.name = name();
    while (true) {
      bool had_ws = !eof() && std::isspace(static_cast<unsigned char>(peek()));
      skip_ws();
      if (eof()) fail("unterminated start tag <" + el.name + ">");
      if (looking_at("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_ws) fail("expected whitespace between attributes");
      auto key = name();
      skip_ws();
      expect("=");
      skip_ws();
      if (el.attribute(key)) fail("duplicate attribute '" + key + "'");
      el.attributes.emplace_back(key, attribute_value());
    }
    content(el, depth);
    return el;
  }

  void content(Element& el, std::size_t depth) {
    while (true) {
      if (eof()) fail("missing end tag </" + el.name + ">");
      if (looking_at("</")) {
        advance(2);
        auto closing = name();
        if (closing != el.name) fail("mismatched end tag </" + closing + ">, expected </" + el.name + ">");
        skip_ws();
        expect(">");
        return;
      }
      if (looking_at("<!--")) {
        advance(4);
        skip_until("-->", "comment");
      } else if (looking_at("<![CDATA[")) {
        advance(9);
        auto start = pos_;
        while (!eof() && !looking_at("]]>")) advance();
        if (eof()) fail("unterminated CDATA section");
        el.text.append(doc_.substr(start, pos_ - start));
        advance(3);
      } else if (looking_at("<?")) {
        advance(2);
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element(depth + 1));
      } else if (peek() == '&') {
        entity(el.text);
      } else if (peek() == '\r') {
        advance();
        if (peek() != '\n') el.text += '\n';
      } else {
        el.text += peek();
        advance();
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

std::string escape(std::string_view text, bool attribute) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"':
        out += attribute ? "&quot;" : "\"";
        break;
      case '\r': out += "&#13;"; break;
      case '\n':
        out += attribute ? "&#10;" : "\n";
        break;
      case '\t':
        out += attribute ? "&#9;" : "\t";
        break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Element parse(std::string_view document) { return Reader(document).document(); }

std::string escape_text(std::string_view text) { return escape(text, false); }
std::string escape_attribute(std::string_view text) { return escape(text, true); }

}  // namespace pidgraph::xml
