#include "devaware/model_parser.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <vector>

namespace devaware {

namespace {

std::string kind_label(ModelParseError::Kind kind) {
  switch (kind) {
    case ModelParseError::Kind::Syntax: return "syntax error";
    case ModelParseError::Kind::DuplicateName: return "duplicate name";
    case ModelParseError::Kind::UnresolvedReference: return "unresolved reference";
  }
  return "error";
}

}  // namespace

ModelParseError::ModelParseError(Kind kind, int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + kind_label(kind) + ": " +
                         message),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(message) {}

namespace {

using Kind = ModelParseError::Kind;

struct Token {
  enum class Type { Ident, Stereo, LParen, RParen, Colon, Comma };
  Type type;
  std::string text;
  int column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    int col = static_cast<int>(i) + 1;
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (ident_start(c)) {
      size_t start = i;
      while (i < line.size() && ident_char(line[i])) ++i;
      out.push_back({Token::Type::Ident, std::string(line.substr(start, i - start)), col});
    } else if (c == '<' && line.substr(i, 2) == "<<") {
      size_t start = i + 2;
      size_t end = line.find(">>", start);
      if (end == std::string_view::npos) throw ModelParseError(Kind::Syntax, line_no, col, "unterminated '<<'");
      out.push_back({Token::Type::Stereo, std::string(line.substr(start, end - start)), col});
      i = end + 2;
    } else if (c == '(') {
      out.push_back({Token::Type::LParen, "(", col}), ++i;
    } else if (c == ')') {
      out.push_back({Token::Type::RParen, ")", col}), ++i;
    } else if (c == ':') {
      out.push_back({Token::Type::Colon, ":", col}), ++i;
    } else if (c == ',') {
      out.push_back({Token::Type::Comma, ",", col}), ++i;
    } else {
      throw ModelParseError(Kind::Syntax, line_no, col, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

struct PendingRef {
  std::string package;
  std::string name;
  int line;
  int column;
  bool is_extends;
};

class LineCursor {
 public:
  LineCursor(const std::vector<Token>& tokens, int line_no, int end_column)
      : tokens_(tokens), line_(line_no), end_column_(end_column) {}

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token* peek() const { return at_end() ? nullptr : &tokens_[pos_]; }

  int column() const { return at_end() ? end_column_ : tokens_[pos_].column; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ModelParseError(Kind::Syntax, line_, column(), message);
  }

  const Token& expect(Token::Type type, const char* what) {
    if (at_end() || tokens_[pos_].type != type) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  bool accept(Token::Type type) {
    if (!at_end() && tokens_[pos_].type == type) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_keyword(std::string_view kw) {
    if (!at_end() && tokens_[pos_].type == Token::Type::Ident && tokens_[pos_].text == kw) {
      ++pos_;
      return true;
    }
    return false;
  }

  StereotypeSet stereotypes() {
    StereotypeSet out;
    while (!at_end() && tokens_[pos_].type == Token::Type::Stereo) {
      const Token& t = tokens_[pos_];
      auto s = stereotype_from_string(t.text);
      if (!s) throw ModelParseError(Kind::Syntax, line_, t.column, "unknown stereotype <<" + t.text + ">>");
      if (!out.insert(*s))
        throw ModelParseError(Kind::DuplicateName, line_, t.column, "repeated stereotype <<" + t.text + ">>");
      ++pos_;
    }
    return out;
  }

  void expect_end() {
    if (!at_end()) fail("unexpected '" + tokens_[pos_].text + "'");
  }

  int line() const { return line_; }

 private:
  const std::vector<Token>& tokens_;
  size_t pos_ = 0;
  int line_;
  int end_column_;
};

class Parser {
 public:
  PimModel run(std::string_view text) {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      parse_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    if (!have_model_) throw ModelParseError(Kind::Syntax, line_no, 1, "missing 'model' declaration");
    resolve();
    return std::move(model_);
  }

 private:
  void parse_line(std::string_view line, int line_no) {
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') return;
    auto tokens = lex_line(line, line_no);
    LineCursor cur(tokens, line_no, static_cast<int>(line.size()) + 1);
    const Token& kw = cur.expect(Token::Type::Ident, "keyword");
    if (kw.text == "model") {
      if (have_model_) throw ModelParseError(Kind::Syntax, line_no, kw.column, "second 'model' declaration");
      model_.name = cur.expect(Token::Type::Ident, "model name").text;
      cur.expect_end();
      have_model_ = true;
      return;
    }
    if (!have_model_) throw ModelParseError(Kind::Syntax, line_no, kw.column, "expected 'model' declaration first");
    if (kw.text == "package") {
      parse_package(cur);
    } else if (kw.text == "class") {
      parse_class(cur, kw);
    } else if (kw.text == "attr") {
      parse_attr(cur, kw);
    } else if (kw.text == "op") {
      parse_op(cur, kw);
    } else {
      throw ModelParseError(Kind::Syntax, line_no, kw.column, "unknown keyword '" + kw.text + "'");
    }
  }

  void parse_package(LineCursor& cur) {
    const Token& name = cur.expect(Token::Type::Ident, "package name");
    cur.expect_end();
    if (model_.find_package(name.text))
      throw ModelParseError(Kind::DuplicateName, cur.line(), name.column, "package '" + name.text + "'");
    model_.packages.push_back({name.text, {}});
    current_class_.reset();
  }

  void parse_class(LineCursor& cur, const Token& kw) {
    if (model_.packages.empty())
      throw ModelParseError(Kind::Syntax, cur.line(), kw.column, "'class' outside of a package");
    auto& pkg = model_.packages.back();
    const Token& name = cur.expect(Token::Type::Ident, "class name");
    if (primitive_from_string(name.text))
      throw ModelParseError(Kind::Syntax, cur.line(), name.column, "'" + name.text + "' is a primitive type name");
    if (pkg.find_class(name.text))
      throw ModelParseError(Kind::DuplicateName, cur.line(), name.column, "class '" + name.text + "'");
    ClassNode cls;
    cls.name = name.text;
    cls.stereotypes = cur.stereotypes();
    if (cur.accept_keyword("extends")) {
      const Token& super = cur.expect(Token::Type::Ident, "superclass name");
      cls.extends = super.text;
      refs_.push_back({pkg.name, super.text, cur.line(), super.column, true});
    }
    cur.expect_end();
    pkg.classes.push_back(std::move(cls));
    current_class_ = pkg.classes.size() - 1;
  }

  ClassNode& require_class(const LineCursor& cur, const Token& kw) {
    if (!current_class_)
      throw ModelParseError(Kind::Syntax, cur.line(), kw.column, "'" + kw.text + "' outside of a class");
    return model_.packages.back().classes[*current_class_];
  }

  TypeRef parse_type(LineCursor& cur) {
    const Token& t = cur.expect(Token::Type::Ident, "type name");
    if (auto prim = primitive_from_string(t.text)) return TypeRef::primitive(*prim);
    refs_.push_back({model_.packages.back().name, t.text, cur.line(), t.column, false});
    return TypeRef::class_ref(t.text);
  }

  void parse_attr(LineCursor& cur, const Token& kw) {
    ClassNode& cls = require_class(cur, kw);
    const Token& name = cur.expect(Token::Type::Ident, "attribute name");
    for (const auto& a : cls.attributes)
      if (a.name == name.text)
        throw ModelParseError(Kind::DuplicateName, cur.line(), name.column, "attribute '" + name.text + "'");
    cur.expect(Token::Type::Colon, "':'");
    AttributeNode attr;
    attr.name = name.text;
    attr.type = parse_type(cur);
    attr.stereotypes = cur.stereotypes();
    cur.expect_end();
    cls.attributes.push_back(std::move(attr));
  }

  void parse_op(LineCursor& cur, const Token& kw) {
    ClassNode& cls = require_class(cur, kw);
    const Token& name = cur.expect(Token::Type::Ident, "operation name");
    for (const auto& o : cls.operations)
      if (o.name == name.text)
        throw ModelParseError(Kind::DuplicateName, cur.line(), name.column, "operation '" + name.text + "'");
    OperationNode op;
    op.name = name.text;
    cur.expect(Token::Type::LParen, "'('");
    if (!cur.accept(Token::Type::RParen)) {
      do {
        const Token& pname = cur.expect(Token::Type::Ident, "parameter name");
        if (pname.text == kReturnParamName)
          throw ModelParseError(Kind::Syntax, cur.line(), pname.column, "'return' is reserved");
        for (const auto& p : op.params)
          if (p.name == pname.text)
            throw ModelParseError(Kind::DuplicateName, cur.line(), pname.column, "parameter '" + pname.text + "'");
        cur.expect(Token::Type::Colon, "':'");
        op.params.push_back({pname.text, Direction::In, parse_type(cur)});
      } while (cur.accept(Token::Type::Comma));
      cur.expect(Token::Type::RParen, "')' or ','");
    }
    cur.expect(Token::Type::Colon, "':' before return type");
    op.params.push_back({std::string(kReturnParamName), Direction::Return, parse_type(cur)});
    op.stereotypes = cur.stereotypes();
    cur.expect_end();
    cls.operations.push_back(std::move(op));
  }

  void resolve() const {
    for (const auto& ref : refs_) {
      const auto* pkg = model_.find_package(ref.package);
      bool found = ref.is_extends ? pkg->find_class(ref.name) != nullptr
                                  : resolve_class_ref(model_, *pkg, ref.name) != nullptr;
      if (!found)
        throw ModelParseError(Kind::UnresolvedReference, ref.line, ref.column,
                              (ref.is_extends ? "superclass '" : "type '") + ref.name + "'");
    }
  }

  PimModel model_;
  bool have_model_ = false;
  std::optional<size_t> current_class_;
  std::vector<PendingRef> refs_;
};

void append_stereotypes(std::string& out, const StereotypeSet& set) {
  for (auto s : set.items()) {
    out += " <<";
    out += to_string(s);
    out += ">>";
  }
}

}  // namespace

PimModel parse_model(std::string_view text) { return Parser().run(text); }

std::string serialize_model(const PimModel& model) {
  std::string out = "model " + model.name + "\n";
  for (const auto& pkg : model.packages) {
    out += "  package " + pkg.name + "\n";
    for (const auto& cls : pkg.classes) {
      out += "    class " + cls.name;
      append_stereotypes(out, cls.stereotypes);
      if (cls.extends) out += " extends " + *cls.extends;
      out += "\n";
      for (const auto& attr : cls.attributes) {
        out += "      attr " + attr.name + ": " + attr.type.name;
        append_stereotypes(out, attr.stereotypes);
        out += "\n";
      }
      for (const auto& op : cls.operations) {
        out += "      op " + op.name + "(";
        bool first = true;
        for (const auto* p : op.input_params()) {
          if (!first) out += ", ";
          out += p->name + ": " + p->type.name;
          first = false;
        }
        out += "): ";
        if (const auto* ret = op.return_param()) out += ret->type.name;
        append_stereotypes(out, op.stereotypes);
        out += "\n";
      }
    }
  }
  return out;
}

}  // namespace devaware
