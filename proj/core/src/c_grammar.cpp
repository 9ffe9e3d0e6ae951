#include "patch_triage/c_grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "patch_triage/error.hpp"

namespace patch_triage {

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "auto",     "break",    "case",     "char",   "const",    "continue", "default",
    "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
    "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
    "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
    "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "_Bool",
    "bool",     "_Complex", "__inline", "__restrict", "_Thread_local", "__attribute__",
    "__extension__", "_Alignof", "__typeof__", "typeof", "__asm__", "asm"};

const std::set<std::string, std::less<>> kPrimitiveTypes = {
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned",
    "_Bool", "bool", "_Complex"};

const std::set<std::string, std::less<>> kStorageClasses = {
    "static", "extern", "register", "auto", "typedef", "inline", "__inline", "_Thread_local"};

const std::set<std::string, std::less<>> kQualifiers = {"const", "volatile", "restrict",
                                                        "__restrict"};

// Longest first so that maximal munch works with a linear scan.
constexpr std::array<std::string_view, 48> kPunctuators = {
    "...", ">>=", "<<=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##", "#",
    "{",   "}",   "[",   "]",  "(",  ")",  ";",  ",",  ":",  "?",  "=",  "<",
    ">",   "+",   "-",   "*",  "/",  "%",  "&",  "|",  "^",  "!",  "~",  "."};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view src, bool strict) : src_(src), strict_(strict) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == '\n') {
        line_start = true;
        ++i_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
        continue;
      }
      if (c == '\\' && i_ + 1 < src_.size() && src_[i_ + 1] == '\n') {
        i_ += 2;
        continue;
      }
      if (starts_with("//")) {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
        continue;
      }
      if (starts_with("/*")) {
        skip_block_comment();
        continue;
      }
      const std::size_t begin = i_;
      if (c == '#' && line_start) {
        out.push_back(Token{TokenKind::Preproc, read_directive(), begin, i_});
        continue;
      }
      line_start = false;
      if (ident_start(c)) {
        while (i_ < src_.size() && ident_char(src_[i_])) ++i_;
        std::string word(src_.substr(begin, i_ - begin));
        // Encoding prefixes glue onto the following literal.
        if (i_ < src_.size() && (src_[i_] == '"' || src_[i_] == '\'') &&
            (word == "L" || word == "u" || word == "U" || word == "u8")) {
          const bool is_string = src_[i_] == '"';
          read_quoted(src_[i_]);
          out.push_back(Token{is_string ? TokenKind::String : TokenKind::Char,
                              std::string(src_.substr(begin, i_ - begin)), begin, i_});
          continue;
        }
        const TokenKind kind = kKeywords.count(word) ? TokenKind::Keyword : TokenKind::Identifier;
        out.push_back(Token{kind, std::move(word), begin, i_});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        read_number();
        out.push_back(Token{TokenKind::Number, std::string(src_.substr(begin, i_ - begin)), begin, i_});
        continue;
      }
      if (c == '"' || c == '\'') {
        read_quoted(c);
        out.push_back(Token{c == '"' ? TokenKind::String : TokenKind::Char,
                            std::string(src_.substr(begin, i_ - begin)), begin, i_});
        continue;
      }
      bool matched = false;
      for (std::string_view p : kPunctuators) {
        if (starts_with(p)) {
          i_ += p.size();
          out.push_back(Token{TokenKind::Punct, std::string(p), begin, i_});
          matched = true;
          break;
        }
      }
      if (!matched) {
        // Stray byte (e.g. '@' or non-ASCII); keep it as a one-char punctuator.
        ++i_;
        out.push_back(Token{TokenKind::Punct, std::string(1, c), begin, i_});
      }
    }
    return out;
  }

 private:
  bool starts_with(std::string_view p) const { return src_.substr(i_, p.size()) == p; }

  void skip_block_comment() {
    const std::size_t begin = i_;
    const auto close = src_.find("*/", i_ + 2);
    if (close == std::string_view::npos) {
      if (strict_) throw ParseError(begin, "unterminated comment");
      i_ = src_.size();
      return;
    }
    i_ = close + 2;
  }

  std::string read_directive() {
    std::string text;
    while (i_ < src_.size() && src_[i_] != '\n') {
      if (src_[i_] == '\\' && i_ + 1 < src_.size() && src_[i_ + 1] == '\n') {
        text.push_back(' ');
        i_ += 2;
        continue;
      }
      if (starts_with("//")) {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
        break;
      }
      if (starts_with("/*")) {
        skip_block_comment();
        text.push_back(' ');
        continue;
      }
      text.push_back(src_[i_++]);
    }
    return collapse_ws(text);
  }

  void read_number() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if ((c == '+' || c == '-') && i_ > 0 &&
          (src_[i_ - 1] == 'e' || src_[i_ - 1] == 'E' || src_[i_ - 1] == 'p' || src_[i_ - 1] == 'P') &&
          !(src_[i_ - 1] == 'e' && i_ > 1 && (src_[i_ - 2] == 'x' || src_[i_ - 2] == 'X'))) {
        ++i_;
        continue;
      }
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '\'') {
        ++i_;
        continue;
      }
      break;
    }
  }

  void read_quoted(char quote) {
    const std::size_t begin = i_;
    ++i_;
    while (i_ < src_.size() && src_[i_] != quote) {
      if (src_[i_] == '\\') ++i_;
      else if (src_[i_] == '\n') break;
      ++i_;
    }
    if (i_ >= src_.size() || src_[i_] != quote) {
      if (strict_) throw ParseError(begin, "unterminated literal");
      i_ = std::min(i_, src_.size());
      return;
    }
    ++i_;
  }

  std::string_view src_;
  bool strict_;
  std::size_t i_ = 0;
};

// Intermediate parse node; emitted into a TreeBuilder once complete.
struct PNode {
  std::string type;
  std::optional<std::string> label;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<PNode> children;
};

struct Fail {
  std::size_t offset;
  std::string what;
};

class Parser {
 public:
  Parser(std::string_view src, const std::vector<Token>& tokens) : src_(src), t_(tokens) {}

  PNode translation_unit() {
    PNode root{"translation_unit", std::nullopt, 0, src_.size(), {}};
    while (!eof()) {
      const std::size_t start = pos_;
      try {
        root.children.push_back(external_declaration());
      } catch (const Fail&) {
        pos_ = start;
        root.children.push_back(recover());
        if (pos_ == start) ++pos_;
      }
    }
    return root;
  }

 private:
  // ---- token helpers -------------------------------------------------------
  bool eof(std::size_t k = 0) const { return pos_ + k >= t_.size(); }
  const Token& tok(std::size_t k = 0) const {
    static const Token kEnd{TokenKind::Punct, "<eof>", 0, 0};
    if (pos_ + k >= t_.size()) return kEnd;
    return t_[pos_ + k];
  }
  bool is(std::string_view text, std::size_t k = 0) const {
    const Token& x = tok(k);
    return !eof(k) && (x.kind == TokenKind::Punct || x.kind == TokenKind::Keyword) && x.text == text;
  }
  bool is_kind(TokenKind kind, std::size_t k = 0) const { return !eof(k) && tok(k).kind == kind; }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Fail{eof() ? src_.size() : tok().begin, what};
  }
  void expect(std::string_view text) {
    if (!accept(text)) fail("expected '" + std::string(text) + "'");
  }
  std::size_t here() const { return eof() ? src_.size() : tok().begin; }
  std::size_t last_end() const { return pos_ == 0 ? 0 : t_[pos_ - 1].end; }

  PNode make(std::string type, std::optional<std::string> label, std::size_t begin) const {
    return PNode{std::move(type), std::move(label), begin, std::max(begin, last_end()), {}};
  }
  PNode finish(PNode n) const {
    n.end = std::max(n.begin, last_end());
    return n;
  }
  PNode leaf(std::string type, std::optional<std::string> label) {
    const Token& x = tok();
    PNode n{std::move(type), std::move(label), x.begin, x.end, {}};
    ++pos_;
    return n;
  }

  // ---- classification helpers ---------------------------------------------
  bool is_type_name(const Token& x) const {
    if (x.kind != TokenKind::Identifier) return false;
    if (typedefs_.count(x.text)) return true;
    return x.text.size() > 2 && x.text.ends_with("_t");
  }
  bool is_specifier_keyword(std::size_t k) const {
    if (!is_kind(TokenKind::Keyword, k)) return false;
    const std::string& w = tok(k).text;
    return kPrimitiveTypes.count(w) || kStorageClasses.count(w) || kQualifiers.count(w) ||
           w == "struct" || w == "union" || w == "enum" || w == "__attribute__" ||
           w == "__extension__" || w == "typeof" || w == "__typeof__";
  }
  bool looks_like_declaration() const {
    if (is_specifier_keyword(0)) return true;
    if (!is_kind(TokenKind::Identifier)) return false;
    if (is_type_name(tok()) && (is_kind(TokenKind::Identifier, 1) || is("*", 1) ||
                                (is("(", 1) && is("*", 2)))) {
      return true;
    }
    if (is_kind(TokenKind::Identifier, 1)) {
      // `Type name` but not `label:`-style or macro-call forms.
      return is(";", 2) || is("=", 2) || is(",", 2) || is("[", 2) || is("(", 2) ||
             is_kind(TokenKind::Identifier, 2) || is("*", 2);
    }
    if (is("*", 1)) {
      std::size_t k = 1;
      while (is("*", k)) ++k;
      return is_kind(TokenKind::Identifier, k) &&
             (is("=", k + 1) || is(";", k + 1) || is(",", k + 1) || is("[", k + 1) || is(")", k + 1));
    }
    return false;
  }
  bool type_name_follows(std::size_t k) const {
    if (is_specifier_keyword(k)) return true;
    if (!is_kind(TokenKind::Identifier, k)) return false;
    if (is_type_name(tok(k))) return is(")", k + 1) || is("*", k + 1) || is("(", k + 1) ||
                                     is_specifier_keyword(k + 1);
    // `(Foo *)` or `(Foo **)` followed by `)`.
    std::size_t j = k + 1;
    if (!is("*", j)) return false;
    while (is("*", j)) ++j;
    return is(")", j);
  }

  // ---- error recovery -------------------------------------------------------
  PNode recover() {
    const std::size_t begin = here();
    std::string text;
    int depth = 0;
    bool consumed = false;
    while (!eof()) {
      const Token& x = tok();
      if (x.kind == TokenKind::Punct) {
        if (x.text == "{" || x.text == "(" || x.text == "[") ++depth;
        if (x.text == "}" || x.text == ")" || x.text == "]") {
          // A closer at depth 0 belongs to the enclosing construct.
          if (depth == 0) break;
          --depth;
          if (depth == 0 && x.text == "}") {
            append_lexeme(text, x);
            ++pos_;
            if (is(";")) append_lexeme(text, tok()), ++pos_;
            break;
          }
        }
        if (x.text == ";" && depth == 0) {
          append_lexeme(text, x);
          ++pos_;
          break;
        }
      }
      if (x.kind == TokenKind::Preproc && consumed && depth == 0) break;
      append_lexeme(text, x);
      ++pos_;
      consumed = true;
    }
    return make("ERROR", text, begin);
  }
  static void append_lexeme(std::string& text, const Token& x) {
    if (!text.empty()) text.push_back(' ');
    if (x.kind == TokenKind::String || x.kind == TokenKind::Char) text += "<LIT>";
    else text += x.text;
  }

  // ---- declarations -----------------------------------------------------------
  PNode external_declaration() {
    if (is_kind(TokenKind::Preproc)) return leaf("preproc_directive", tok().text);
    if (is(";")) return leaf("empty_declaration", std::nullopt);
    return declaration(/*top_level=*/true);
  }

  void skip_balanced_parens() {
    expect("(");
    int depth = 1;
    while (!eof() && depth > 0) {
      if (is("(")) ++depth;
      if (is(")")) --depth;
      ++pos_;
    }
    if (depth != 0) fail("unbalanced attribute");
  }

  std::vector<PNode> declaration_specifiers() {
    std::vector<PNode> specs;
    bool seen_type = false;
    while (!eof()) {
      if (is("__attribute__") || is("__extension__")) {
        ++pos_;
        if (is("(")) skip_balanced_parens();
        continue;
      }
      if (is_kind(TokenKind::Keyword) && kStorageClasses.count(tok().text)) {
        specs.push_back(leaf("storage_class_specifier", tok().text));
        continue;
      }
      if (is_kind(TokenKind::Keyword) && kQualifiers.count(tok().text)) {
        specs.push_back(leaf("type_qualifier", tok().text));
        continue;
      }
      if (is_kind(TokenKind::Keyword) && kPrimitiveTypes.count(tok().text)) {
        const std::size_t begin = here();
        std::string label;
        while (is_kind(TokenKind::Keyword) && kPrimitiveTypes.count(tok().text)) {
          if (!label.empty()) label.push_back(' ');
          label += tok().text;
          ++pos_;
        }
        specs.push_back(make("primitive_type", label, begin));
        seen_type = true;
        continue;
      }
      if (is("struct") || is("union")) {
        specs.push_back(struct_specifier());
        seen_type = true;
        continue;
      }
      if (is("enum")) {
        specs.push_back(enum_specifier());
        seen_type = true;
        continue;
      }
      if (is("typeof") || is("__typeof__")) {
        const std::size_t begin = here();
        ++pos_;
        expect("(");
        PNode n = make("typeof_specifier", std::nullopt, begin);
        n.children.push_back(expression());
        expect(")");
        specs.push_back(finish(std::move(n)));
        seen_type = true;
        continue;
      }
      if (is_kind(TokenKind::Identifier)) {
        if (!seen_type &&
            (is_type_name(tok()) || is_kind(TokenKind::Identifier, 1) || is("*", 1))) {
          specs.push_back(leaf("type_identifier", tok().text));
          seen_type = true;
          continue;
        }
        if (seen_type && is_kind(TokenKind::Identifier, 1)) {
          // Annotation macros such as `__init` between type and name.
          specs.push_back(leaf("attribute_macro", tok().text));
          continue;
        }
      }
      break;
    }
    return specs;
  }

  PNode struct_specifier() {
    const std::size_t begin = here();
    const std::string kind = tok().text;
    ++pos_;
    PNode n = make(kind + "_specifier", std::nullopt, begin);
    while (is("__attribute__")) {
      ++pos_;
      skip_balanced_parens();
    }
    if (is_kind(TokenKind::Identifier)) n.children.push_back(leaf("type_identifier", tok().text));
    if (is("{")) {
      const std::size_t body_begin = here();
      ++pos_;
      PNode body = make("field_declaration_list", std::nullopt, body_begin);
      while (!is("}")) {
        if (eof()) fail("unterminated struct body");
        if (is_kind(TokenKind::Preproc)) {
          body.children.push_back(leaf("preproc_directive", tok().text));
          continue;
        }
        if (accept(";")) continue;
        body.children.push_back(field_declaration());
      }
      expect("}");
      n.children.push_back(finish(std::move(body)));
    }
    while (is("__attribute__")) {
      ++pos_;
      skip_balanced_parens();
    }
    if (n.children.empty()) fail("empty " + kind + " specifier");
    return finish(std::move(n));
  }

  PNode field_declaration() {
    const std::size_t begin = here();
    PNode n = make("field_declaration", std::nullopt, begin);
    auto specs = declaration_specifiers();
    if (specs.empty()) fail("expected field type");
    for (auto& s : specs) n.children.push_back(std::move(s));
    if (!is(";")) {
      do {
        const std::size_t d_begin = here();
        std::optional<PNode> decl;
        if (!is(":")) decl = declarator(false);
        if (accept(":")) {
          PNode bf = make("bitfield_clause", std::nullopt, d_begin);
          if (decl) bf.children.push_back(std::move(*decl));
          bf.children.push_back(conditional());
          n.children.push_back(finish(std::move(bf)));
        } else {
          n.children.push_back(std::move(*decl));
        }
      } while (accept(","));
    }
    expect(";");
    return finish(std::move(n));
  }

  PNode enum_specifier() {
    const std::size_t begin = here();
    ++pos_;
    PNode n = make("enum_specifier", std::nullopt, begin);
    if (is_kind(TokenKind::Identifier)) n.children.push_back(leaf("type_identifier", tok().text));
    if (is("{")) {
      const std::size_t list_begin = here();
      ++pos_;
      PNode list = make("enumerator_list", std::nullopt, list_begin);
      while (!is("}")) {
        if (eof()) fail("unterminated enum");
        if (is_kind(TokenKind::Preproc)) {
          list.children.push_back(leaf("preproc_directive", tok().text));
          continue;
        }
        const std::size_t e_begin = here();
        if (!is_kind(TokenKind::Identifier)) fail("expected enumerator");
        PNode e = make("enumerator", std::nullopt, e_begin);
        e.children.push_back(leaf("identifier", tok().text));
        if (accept("=")) e.children.push_back(conditional());
        list.children.push_back(finish(std::move(e)));
        if (!accept(",")) break;
      }
      expect("}");
      n.children.push_back(finish(std::move(list)));
    }
    if (n.children.empty()) fail("empty enum specifier");
    return finish(std::move(n));
  }

  // Declarator; with `abstract` the identifier may be omitted.
  PNode declarator(bool abstract) {
    const std::size_t begin = here();
    if (accept("*")) {
      PNode n = make("pointer_declarator", std::nullopt, begin);
      while (is_kind(TokenKind::Keyword) && kQualifiers.count(tok().text)) {
        n.children.push_back(leaf("type_qualifier", tok().text));
      }
      while (is_kind(TokenKind::Identifier) &&
             (is_kind(TokenKind::Identifier, 1) || is("*", 1))) {
        n.children.push_back(leaf("attribute_macro", tok().text));
      }
      if (abstract && (is(")") || is(",") || is("]"))) return finish(std::move(n));
      n.children.push_back(declarator(abstract));
      return finish(std::move(n));
    }
    PNode inner;
    bool have_inner = false;
    if (is_kind(TokenKind::Identifier)) {
      inner = leaf("identifier", tok().text);
      have_inner = true;
    } else if (is("(") && (is("*", 1) || is("^", 1) || (is("(", 1)) ||
                           (!abstract && is_kind(TokenKind::Identifier, 1) && is(")", 2)))) {
      ++pos_;
      PNode paren = make("parenthesized_declarator", std::nullopt, begin);
      paren.children.push_back(declarator(abstract));
      expect(")");
      inner = finish(std::move(paren));
      have_inner = true;
    } else if (!abstract) {
      fail("expected declarator");
    }
    PNode current = have_inner ? std::move(inner) : make("abstract_declarator", std::nullopt, begin);
    while (true) {
      if (is("[")) {
        ++pos_;
        PNode arr = make("array_declarator", std::nullopt, begin);
        arr.children.push_back(std::move(current));
        if (!is("]")) arr.children.push_back(expression());
        expect("]");
        current = finish(std::move(arr));
        continue;
      }
      if (is("(")) {
        PNode fn = make("function_declarator", std::nullopt, begin);
        fn.children.push_back(std::move(current));
        fn.children.push_back(parameter_list());
        current = finish(std::move(fn));
        while (is("__attribute__")) {
          ++pos_;
          skip_balanced_parens();
        }
        continue;
      }
      break;
    }
    return current;
  }

  PNode parameter_list() {
    const std::size_t begin = here();
    expect("(");
    PNode list = make("parameter_list", std::nullopt, begin);
    if (accept(")")) return finish(std::move(list));
    do {
      if (is("...")) {
        list.children.push_back(leaf("variadic_parameter", std::nullopt));
        break;
      }
      const std::size_t p_begin = here();
      PNode p = make("parameter_declaration", std::nullopt, p_begin);
      auto specs = declaration_specifiers();
      if (specs.empty()) fail("expected parameter type");
      for (auto& s : specs) p.children.push_back(std::move(s));
      if (!is(",") && !is(")")) p.children.push_back(declarator(true));
      list.children.push_back(finish(std::move(p)));
    } while (accept(","));
    expect(")");
    return finish(std::move(list));
  }

  static bool has_function_declarator(const PNode& n) {
    if (n.type == "function_declarator") return true;
    if (n.type == "pointer_declarator" || n.type == "parenthesized_declarator") {
      return !n.children.empty() && has_function_declarator(n.children.back());
    }
    return false;
  }

  static void collect_declared_names(const PNode& n, std::set<std::string, std::less<>>& out) {
    if (n.type == "identifier" && n.label) {
      out.insert(*n.label);
      return;
    }
    if (n.type == "init_declarator" || n.type == "pointer_declarator" ||
        n.type == "parenthesized_declarator" || n.type == "array_declarator" ||
        n.type == "function_declarator") {
      for (const auto& c : n.children) {
        if (c.type == "parameter_list") continue;
        collect_declared_names(c, out);
        if (n.type != "pointer_declarator") break;
      }
    }
  }

  PNode declaration(bool top_level) {
    const std::size_t begin = here();
    auto specs = declaration_specifiers();
    if (specs.empty()) fail("expected declaration");
    const bool is_typedef = std::any_of(specs.begin(), specs.end(), [](const PNode& s) {
      return s.type == "storage_class_specifier" && s.label == "typedef";
    });
    PNode n = make("declaration", std::nullopt, begin);
    for (auto& s : specs) n.children.push_back(std::move(s));
    if (accept(";")) return finish(std::move(n));

    bool first = true;
    do {
      const std::size_t d_begin = here();
      PNode decl = declarator(false);
      if (first && top_level && has_function_declarator(decl) && is("{")) {
        n.type = "function_definition";
        n.children.push_back(std::move(decl));
        n.children.push_back(compound_statement());
        return finish(std::move(n));
      }
      first = false;
      while (is("__attribute__") || is("__asm__") || is("asm")) {
        ++pos_;
        skip_balanced_parens();
      }
      if (is_typedef) collect_declared_names(decl, typedefs_);
      if (accept("=")) {
        PNode init = make("init_declarator", std::nullopt, d_begin);
        init.children.push_back(std::move(decl));
        init.children.push_back(initializer());
        n.children.push_back(finish(std::move(init)));
      } else {
        n.children.push_back(std::move(decl));
      }
    } while (accept(","));
    expect(";");
    return finish(std::move(n));
  }

  PNode initializer() {
    if (!is("{")) return assignment();
    const std::size_t begin = here();
    ++pos_;
    PNode list = make("initializer_list", std::nullopt, begin);
    while (!is("}")) {
      if (eof()) fail("unterminated initializer");
      const std::size_t item_begin = here();
      if (is(".") || is("[")) {
        PNode pair = make("initializer_pair", std::nullopt, item_begin);
        while (is(".") || is("[")) {
          const std::size_t d_begin = here();
          if (accept(".")) {
            if (!is_kind(TokenKind::Identifier)) fail("expected field designator");
            PNode d = make("field_designator", std::nullopt, d_begin);
            d.children.push_back(leaf("field_identifier", tok().text));
            pair.children.push_back(finish(std::move(d)));
          } else {
            ++pos_;
            PNode d = make("subscript_designator", std::nullopt, d_begin);
            d.children.push_back(conditional());
            expect("]");
            pair.children.push_back(finish(std::move(d)));
          }
        }
        expect("=");
        pair.children.push_back(initializer());
        list.children.push_back(finish(std::move(pair)));
      } else {
        list.children.push_back(initializer());
      }
      if (!accept(",")) break;
    }
    expect("}");
    return finish(std::move(list));
  }

  PNode type_descriptor() {
    const std::size_t begin = here();
    PNode n = make("type_descriptor", std::nullopt, begin);
    auto specs = declaration_specifiers();
    if (specs.empty()) {
      if (!is_kind(TokenKind::Identifier)) fail("expected type name");
      specs.push_back(leaf("type_identifier", tok().text));
    }
    for (auto& s : specs) n.children.push_back(std::move(s));
    if (!is(")")) n.children.push_back(declarator(true));
    return finish(std::move(n));
  }

  // ---- statements -----------------------------------------------------------
  PNode compound_statement() {
    const std::size_t begin = here();
    expect("{");
    PNode block = make("compound_statement", std::nullopt, begin);
    while (!is("}")) {
      if (eof()) fail("unterminated block");
      block.children.push_back(statement_or_recover());
    }
    expect("}");
    return finish(std::move(block));
  }

  PNode statement_or_recover() {
    const std::size_t start = pos_;
    try {
      return statement();
    } catch (const Fail&) {
      pos_ = start;
      PNode err = recover();
      if (pos_ == start && !is("}")) fail("cannot recover statement");
      return err;
    }
  }

  PNode statement() {
    const std::size_t begin = here();
    if (is_kind(TokenKind::Preproc)) return leaf("preproc_directive", tok().text);
    if (is("{")) return compound_statement();
    if (accept(";")) return make("empty_statement", std::nullopt, begin);
    if (accept("if")) {
      PNode n = make("if_statement", std::nullopt, begin);
      n.children.push_back(condition_clause());
      n.children.push_back(statement_or_recover());
      if (is("else")) {
        const std::size_t else_begin = here();
        ++pos_;
        PNode e = make("else_clause", std::nullopt, else_begin);
        e.children.push_back(statement_or_recover());
        n.children.push_back(finish(std::move(e)));
      }
      return finish(std::move(n));
    }
    if (accept("while")) {
      PNode n = make("while_statement", std::nullopt, begin);
      n.children.push_back(condition_clause());
      n.children.push_back(statement_or_recover());
      return finish(std::move(n));
    }
    if (accept("do")) {
      PNode n = make("do_statement", std::nullopt, begin);
      n.children.push_back(statement_or_recover());
      expect("while");
      n.children.push_back(condition_clause());
      expect(";");
      return finish(std::move(n));
    }
    if (accept("for")) {
      PNode n = make("for_statement", std::nullopt, begin);
      expect("(");
      if (looks_like_declaration()) {
        n.children.push_back(declaration(false));
      } else {
        if (!is(";")) n.children.push_back(expression());
        expect(";");
      }
      if (!is(";")) n.children.push_back(expression());
      expect(";");
      if (!is(")")) n.children.push_back(expression());
      expect(")");
      n.children.push_back(statement_or_recover());
      return finish(std::move(n));
    }
    if (accept("switch")) {
      PNode n = make("switch_statement", std::nullopt, begin);
      n.children.push_back(condition_clause());
      n.children.push_back(statement_or_recover());
      return finish(std::move(n));
    }
    if (accept("case")) {
      PNode n = make("case_statement", std::nullopt, begin);
      n.children.push_back(conditional());
      if (accept("...")) n.children.push_back(conditional());
      expect(":");
      return finish(std::move(n));
    }
    if (accept("default")) {
      expect(":");
      return make("case_statement", "default", begin);
    }
    if (accept("return")) {
      PNode n = make("return_statement", std::nullopt, begin);
      if (!is(";")) n.children.push_back(expression());
      expect(";");
      return finish(std::move(n));
    }
    if (accept("break")) {
      expect(";");
      return make("break_statement", std::nullopt, begin);
    }
    if (accept("continue")) {
      expect(";");
      return make("continue_statement", std::nullopt, begin);
    }
    if (accept("goto")) {
      PNode n = make("goto_statement", std::nullopt, begin);
      if (!is_kind(TokenKind::Identifier)) fail("expected label");
      n.children.push_back(leaf("statement_identifier", tok().text));
      expect(";");
      return finish(std::move(n));
    }
    if (is_kind(TokenKind::Identifier) && is(":", 1)) {
      PNode n = make("labeled_statement", std::nullopt, begin);
      n.children.push_back(leaf("statement_identifier", tok().text));
      ++pos_;
      if (!is("}")) n.children.push_back(statement_or_recover());
      return finish(std::move(n));
    }
    if (looks_like_declaration()) {
      const std::size_t start = pos_;
      try {
        return declaration(false);
      } catch (const Fail&) {
        pos_ = start;
      }
    }
    PNode n = make("expression_statement", std::nullopt, begin);
    n.children.push_back(expression());
    expect(";");
    return finish(std::move(n));
  }

  PNode condition_clause() {
    const std::size_t begin = here();
    expect("(");
    PNode n = make("parenthesized_expression", std::nullopt, begin);
    n.children.push_back(expression());
    expect(")");
    return finish(std::move(n));
  }

  // ---- expressions ----------------------------------------------------------
  PNode expression() {
    const std::size_t begin = here();
    PNode first = assignment();
    if (!is(",")) return first;
    PNode n = make("comma_expression", std::nullopt, begin);
    n.children.push_back(std::move(first));
    while (accept(",")) n.children.push_back(assignment());
    return finish(std::move(n));
  }

  static bool is_assignment_op(const Token& x) {
    static const std::set<std::string, std::less<>> ops = {"=",  "+=", "-=", "*=",  "/=", "%=",
                                                           "&=", "^=", "|=", "<<=", ">>="};
    return x.kind == TokenKind::Punct && ops.count(x.text);
  }

  PNode assignment() {
    const std::size_t begin = here();
    PNode left = conditional();
    if (!eof() && is_assignment_op(tok())) {
      const std::string op = tok().text;
      ++pos_;
      PNode n = make("assignment_expression", op, begin);
      n.children.push_back(std::move(left));
      n.children.push_back(assignment());
      return finish(std::move(n));
    }
    return left;
  }

  PNode conditional() {
    const std::size_t begin = here();
    PNode cond = binary(1);
    if (!accept("?")) return cond;
    PNode n = make("conditional_expression", std::nullopt, begin);
    n.children.push_back(std::move(cond));
    if (!is(":")) n.children.push_back(expression());  // GNU `a ?: b` omits this
    expect(":");
    n.children.push_back(conditional());
    return finish(std::move(n));
  }

  static int precedence(const Token& x) {
    if (x.kind != TokenKind::Punct) return 0;
    const std::string& op = x.text;
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  PNode binary(int min_prec) {
    const std::size_t begin = here();
    PNode left = cast();
    while (!eof()) {
      const int prec = precedence(tok());
      if (prec == 0 || prec < min_prec) break;
      const std::string op = tok().text;
      ++pos_;
      PNode right = binary(prec + 1);
      PNode n = make("binary_expression", op, begin);
      n.children.push_back(std::move(left));
      n.children.push_back(std::move(right));
      left = finish(std::move(n));
    }
    return left;
  }

  PNode cast() {
    const std::size_t begin = here();
    if (is("(") && type_name_follows(1)) {
      const std::size_t start = pos_;
      try {
        ++pos_;
        PNode type = type_descriptor();
        expect(")");
        if (is("{")) {
          PNode n = make("compound_literal_expression", std::nullopt, begin);
          n.children.push_back(std::move(type));
          n.children.push_back(initializer());
          return postfix(finish(std::move(n)), begin);
        }
        PNode n = make("cast_expression", std::nullopt, begin);
        n.children.push_back(std::move(type));
        n.children.push_back(cast());
        return finish(std::move(n));
      } catch (const Fail&) {
        pos_ = start;
      }
    }
    return unary();
  }

  PNode unary() {
    const std::size_t begin = here();
    if (is("++") || is("--")) {
      const std::string op = tok().text;
      ++pos_;
      PNode n = make("prefix_update_expression", op, begin);
      n.children.push_back(unary());
      return finish(std::move(n));
    }
    if (is("&") || is("*")) {
      const std::string op = tok().text;
      ++pos_;
      PNode n = make("pointer_expression", op, begin);
      n.children.push_back(cast());
      return finish(std::move(n));
    }
    if (is("+") || is("-") || is("~") || is("!")) {
      const std::string op = tok().text;
      ++pos_;
      PNode n = make("unary_expression", op, begin);
      n.children.push_back(cast());
      return finish(std::move(n));
    }
    if (is("sizeof") || is("_Alignof")) {
      const std::string op = tok().text;
      ++pos_;
      PNode n = make(op == "sizeof" ? "sizeof_expression" : "alignof_expression", std::nullopt, begin);
      if (is("(") && type_name_follows(1)) {
        const std::size_t start = pos_;
        try {
          ++pos_;
          n.children.push_back(type_descriptor());
          expect(")");
          return finish(std::move(n));
        } catch (const Fail&) {
          pos_ = start;
        }
      }
      n.children.push_back(unary());
      return finish(std::move(n));
    }
    return postfix(primary(), begin);
  }

  PNode postfix(PNode expr, std::size_t begin) {
    while (!eof()) {
      if (accept("[")) {
        PNode n = make("subscript_expression", std::nullopt, begin);
        n.children.push_back(std::move(expr));
        n.children.push_back(expression());
        expect("]");
        expr = finish(std::move(n));
      } else if (is("(")) {
        const std::size_t args_begin = here();
        ++pos_;
        PNode args = make("argument_list", std::nullopt, args_begin);
        if (!is(")")) {
          do {
            args.children.push_back(argument());
          } while (accept(","));
        }
        expect(")");
        PNode n = make("call_expression", std::nullopt, begin);
        n.children.push_back(std::move(expr));
        n.children.push_back(finish(std::move(args)));
        expr = finish(std::move(n));
      } else if (is(".") || is("->")) {
        const std::string op = tok().text;
        ++pos_;
        if (!is_kind(TokenKind::Identifier)) fail("expected field name");
        PNode n = make("field_expression", op, begin);
        n.children.push_back(std::move(expr));
        n.children.push_back(leaf("field_identifier", tok().text));
        expr = finish(std::move(n));
      } else if (is("++") || is("--")) {
        const std::string op = tok().text;
        ++pos_;
        PNode n = make("update_expression", op, begin);
        n.children.push_back(std::move(expr));
        expr = finish(std::move(n));
      } else {
        break;
      }
    }
    return expr;
  }

  // Macro arguments may be type names (e.g. `va_arg(ap, int)`).
  PNode argument() {
    if (is_specifier_keyword(0) && (is(",", 1) || is(")", 1) || is("*", 1) || is_specifier_keyword(1))) {
      return type_descriptor();
    }
    return assignment();
  }

  PNode primary() {
    const std::size_t begin = here();
    if (eof()) fail("unexpected end of input");
    const Token& x = tok();
    switch (x.kind) {
      case TokenKind::Identifier:
        return leaf("identifier", x.text);
      case TokenKind::Number:
        return leaf("number_literal", x.text);
      case TokenKind::Char:
        return leaf("char_literal", std::string("<LIT>"));
      case TokenKind::String: {
        ++pos_;
        // Adjacent literals, possibly with macro pieces such as PRIu64.
        while (is_kind(TokenKind::String) ||
               (is_kind(TokenKind::Identifier) && is_kind(TokenKind::String, 1))) {
          ++pos_;
        }
        return make("string_literal", std::string("<LIT>"), begin);
      }
      case TokenKind::Keyword:
        if (x.text == "__extension__") {
          ++pos_;
          return cast();
        }
        break;
      case TokenKind::Punct:
        if (x.text == "(") {
          ++pos_;
          PNode n = make("parenthesized_expression", std::nullopt, begin);
          if (is("{")) {
            n.type = "statement_expression";
            n.children.push_back(compound_statement());
          } else {
            n.children.push_back(expression());
          }
          expect(")");
          return finish(std::move(n));
        }
        break;
      case TokenKind::Preproc:
        break;
    }
    fail("unexpected token '" + x.text + "'");
  }

  std::string_view src_;
  const std::vector<Token>& t_;
  std::size_t pos_ = 0;
  std::set<std::string, std::less<>> typedefs_;
};

void check_balance(const std::vector<Token>& tokens) {
  std::vector<const Token*> stack;
  for (const Token& x : tokens) {
    if (x.kind != TokenKind::Punct) continue;
    if (x.text == "(" || x.text == "[" || x.text == "{") {
      stack.push_back(&x);
    } else if (x.text == ")" || x.text == "]" || x.text == "}") {
      const char open = x.text == ")" ? '(' : x.text == "]" ? '[' : '{';
      if (stack.empty() || stack.back()->text[0] != open) {
        throw ParseError(x.begin, "unbalanced '" + x.text + "'");
      }
      stack.pop_back();
    }
  }
  if (!stack.empty()) throw ParseError(stack.back()->begin, "unclosed '" + stack.back()->text + "'");
}

void emit(TreeBuilder& builder, PNode& n, NodeId parent) {
  const NodeId id =
      builder.add(std::move(n.type), std::move(n.label), ByteSpan{n.begin, n.end}, parent);
  for (auto& c : n.children) emit(builder, c, id);
}

NodeId find_first(const SyntaxTree& tree, NodeId from, std::string_view type,
                  std::string_view stop_at = {}) {
  const auto end = from + static_cast<NodeId>(tree.subtree_size(from));
  for (NodeId id = from; id < end; ++id) {
    if (tree.type(id) == type) return id;
    if (!stop_at.empty() && tree.type(id) == stop_at) {
      id += static_cast<NodeId>(tree.subtree_size(id)) - 1;
    }
  }
  return kNoNode;
}

}  // namespace

std::vector<Token> tokenize_c(std::string_view text, bool strict) {
  return Lexer(text, strict).run();
}

SyntaxTree CLikeGrammar::parse(std::string_view text) const {
  const auto tokens = tokenize_c(text, /*strict=*/true);
  check_balance(tokens);
  Parser parser(text, tokens);
  PNode root = parser.translation_unit();
  TreeBuilder builder;
  emit(builder, root, kNoNode);
  return std::move(builder).build();
}

std::vector<FunctionInfo> CLikeGrammar::functions(const SyntaxTree& tree) const {
  std::vector<FunctionInfo> out;
  for (NodeId child : tree.children(tree.root())) {
    if (tree.type(child) != "function_definition") continue;
    const NodeId fn_decl = find_first(tree, child, "function_declarator", "compound_statement");
    if (fn_decl == kNoNode) continue;
    // The declared name is the first identifier outside the parameter list.
    const NodeId name_id = find_first(tree, fn_decl, "identifier", "parameter_list");
    if (name_id == kNoNode) continue;
    std::size_t arity = 0;
    const NodeId params = find_first(tree, fn_decl, "parameter_list");
    if (params != kNoNode) {
      const auto kids = tree.children(params);
      for (NodeId p : kids) {
        if (tree.type(p) == "parameter_declaration" || tree.type(p) == "variadic_parameter") ++arity;
      }
      if (kids.size() == 1 && tree.type(kids[0]) == "parameter_declaration" &&
          tree.children(kids[0]).size() == 1 && tree.label(tree.children(kids[0])[0]) == "void") {
        arity = 0;
      }
    }
    out.push_back(FunctionInfo{*tree.label(name_id), arity, child, tree.node(child).span});
  }
  return out;
}

std::vector<std::string> CLikeGrammar::lexemes(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& t : tokenize_c(text, /*strict=*/false)) out.push_back(std::move(t.text));
  return out;
}

bool CLikeGrammar::is_identifier_type(std::string_view type) const {
  return type == "identifier" || type == "field_identifier" || type == "type_identifier" ||
         type == "statement_identifier";
}

void GrammarRegistry::add(std::shared_ptr<const GrammarAdapter> adapter,
                          const std::vector<std::string>& extensions) {
  for (const auto& ext : extensions) by_extension_[ext] = adapter;
}

const GrammarAdapter* GrammarRegistry::find(std::string_view path) const {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash)) return nullptr;
  const auto it = by_extension_.find(path.substr(dot));
  return it == by_extension_.end() ? nullptr : it->second.get();
}

const GrammarAdapter& GrammarRegistry::for_path(std::string_view path) const {
  if (const auto* adapter = find(path)) return *adapter;
  const auto dot = path.find_last_of('.');
  throw GrammarUnavailable(dot == std::string_view::npos ? std::string(path)
                                                         : std::string(path.substr(dot)));
}

GrammarRegistry GrammarRegistry::builtin() {
  GrammarRegistry registry;
  registry.add(std::make_shared<CLikeGrammar>(), {".c", ".h", ".cc", ".cpp", ".hpp", ".cxx", ".hxx"});
  return registry;
}

}  // namespace patch_triage
