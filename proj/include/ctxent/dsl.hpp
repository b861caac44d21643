// Copyright 2026 The ctxent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reader and writer for `.exp` experiment files.
//
// The format is line oriented; `#` starts a comment and blank lines are
// ignored. One experiment per file, and its id is the context id.
//
//   experiment <id>
//   description <free text>                      (optional)
//   model photon|spin|balls
//
//   photon / spin:
//     init angle_deg=<float>
//     stage <label> filter angle_deg=<float>     (photon)
//     stage <label> sg angle_deg=<float>         (spin)
//
//   balls:
//     ball <id> <attr>=<value> ...
//     init all
//     init where <attr>=<value> [and <attr>=<value> ...]
//     stage <label> observe <attr> [refill by <attr> | refill remove | refill none]
//
// Angles are in degrees. Stages must come after `init`.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ctxent/models.hpp"

namespace ctxent::dsl {

inline constexpr std::size_t kMaxSourceBytes = 64 * 1024;

struct SourceFile {
  std::string path;
  std::string text;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
  std::size_t line = 1;  // 1-based
  std::size_t column = 1;  // 1-based byte column
  std::string message;
  Severity severity = Severity::Error;

  friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

struct ParseResult {
  std::optional<ExperimentSpec> spec;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return spec.has_value(); }
};

inline std::string format(const ParseDiagnostic& d, std::string_view path) {
  std::ostringstream os;
  os << path << ":" << d.line << ":" << d.column << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
  return os.str();
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

struct Line {
  std::size_t number;
  std::vector<Token> tokens;
  std::string_view rest_after_first;  // raw text after the directive word, trimmed
};

/// Returns the byte offset of the first invalid sequence, if any.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    const unsigned char c = byte(i);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((byte(i + k) & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::nullopt;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && is_space(raw[i])) ++i;
      if (i >= raw.size()) break;
      std::size_t j = i;
      while (j < raw.size() && !is_space(raw[j])) ++j;
      line.tokens.push_back({raw.substr(i, j - i), i + 1});
      if (line.tokens.size() == 1) line.rest_after_first = trim(raw.substr(j));
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

inline bool is_word(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](char c) { return c == '=' || c == '#' || is_space(c); });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lines_(split_lines(text)) {}

  ParseResult run() {
    collect_header();
    if (model_) interpret_body();
    ParseResult result;
    if (!has_errors()) build(result);
    std::stable_sort(diags_.begin(), diags_.end(), [](const auto& a, const auto& b) {
      return a.line != b.line ? a.line < b.line : a.column < b.column;
    });
    result.diagnostics = std::move(diags_);
    if (has_errors(result.diagnostics)) result.spec.reset();
    return result;
  }

 private:
  enum class Model { Photon, Spin, Balls };

  struct Located {
    std::size_t line = 0;
    std::size_t column = 0;
  };

  void error(std::size_t line, std::size_t column, std::string msg) {
    diags_.push_back({line, column, std::move(msg), Severity::Error});
  }
  void warn(std::size_t line, std::size_t column, std::string msg) {
    diags_.push_back({line, column, std::move(msg), Severity::Warning});
  }
  bool has_errors() const { return has_errors(diags_); }
  static bool has_errors(const std::vector<ParseDiagnostic>& d) {
    return std::any_of(d.begin(), d.end(), [](const auto& x) { return x.severity == Severity::Error; });
  }

  // experiment / description / model, plus unknown directives.
  void collect_header() {
    for (const auto& line : lines_) {
      const auto& head = line.tokens[0];
      const std::string_view word = head.text;
      if (word == "experiment") {
        if (experiment_line_) {
          error(line.number, head.column, "duplicate 'experiment' directive (first on line " +
                                              std::to_string(experiment_line_->line) + ")");
          continue;
        }
        experiment_line_ = Located{line.number, head.column};
        if (line.tokens.size() != 2 || !is_word(line.tokens[1].text)) {
          error(line.number, head.column, "'experiment' expects exactly one id");
          continue;
        }
        id_ = std::string(line.tokens[1].text);
      } else if (word == "description") {
        if (description_line_) {
          error(line.number, head.column, "duplicate 'description' directive");
          continue;
        }
        description_line_ = Located{line.number, head.column};
        description_ = std::string(line.rest_after_first);
      } else if (word == "model") {
        if (model_line_) {
          error(line.number, head.column, "duplicate 'model' directive (first on line " +
                                              std::to_string(model_line_->line) + ")");
          continue;
        }
        model_line_ = Located{line.number, head.column};
        if (line.tokens.size() != 2) {
          error(line.number, head.column, "'model' expects one of photon, spin, balls");
          continue;
        }
        const auto m = line.tokens[1].text;
        if (m == "photon") model_ = Model::Photon;
        else if (m == "spin") model_ = Model::Spin;
        else if (m == "balls") model_ = Model::Balls;
        else error(line.number, line.tokens[1].column, "unknown model '" + std::string(m) + "'");
      } else if (word == "init") {
        if (init_line_) {
          error(line.number, head.column, "duplicate 'init' directive (first on line " +
                                              std::to_string(init_line_->line) + ")");
          continue;
        }
        init_line_ = Located{line.number, head.column};
        body_.push_back(&line);
      } else if (word == "stage" || word == "ball") {
        body_.push_back(&line);
      } else {
        error(line.number, head.column, "unknown directive '" + std::string(word) + "'");
      }
    }
    if (!experiment_line_) error(1, 1, "missing 'experiment' directive");
    if (!model_line_) error(1, 1, "missing 'model' directive");
  }

  std::optional<double> number(const Line& line, const Token& tok, std::string_view value,
                               std::size_t value_column) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (value.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      error(line.number, value_column, "bad number '" + std::string(value) + "'");
      return std::nullopt;
    }
    (void)tok;
    return v;
  }

  // Parses a `angle_deg=<float>` token.
  std::optional<double> angle_arg(const Line& line, std::size_t index) {
    if (index >= line.tokens.size()) {
      error(line.number, line.tokens.back().column, "expected 'angle_deg=<float>'");
      return std::nullopt;
    }
    const auto& tok = line.tokens[index];
    const auto eq = tok.text.find('=');
    if (eq == std::string_view::npos) {
      error(line.number, tok.column, "expected 'angle_deg=<float>', got '" + std::string(tok.text) + "'");
      return std::nullopt;
    }
    const auto key = tok.text.substr(0, eq);
    auto value = number(line, tok, tok.text.substr(eq + 1), tok.column + eq + 1);
    if (key != "angle_deg") {
      error(line.number, tok.column, "unknown key '" + std::string(key) + "' (expected 'angle_deg')");
      return std::nullopt;
    }
    if (index + 1 < line.tokens.size()) {
      error(line.number, line.tokens[index + 1].column,
            "unexpected '" + std::string(line.tokens[index + 1].text) + "'");
      return std::nullopt;
    }
    return value;
  }

  std::optional<AttributeTest> pair(const Line& line, const Token& tok) {
    const auto eq = tok.text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.text.size() ||
        tok.text.find('=', eq + 1) != std::string_view::npos) {
      error(line.number, tok.column, "expected '<attr>=<value>', got '" + std::string(tok.text) + "'");
      return std::nullopt;
    }
    return AttributeTest{std::string(tok.text.substr(0, eq)), std::string(tok.text.substr(eq + 1))};
  }

  void interpret_body() {
    for (const Line* lp : body_) {
      const Line& line = *lp;
      const auto word = line.tokens[0].text;
      if (word == "init") interpret_init(line);
      else if (word == "stage") interpret_stage(line);
      else interpret_ball(line);
    }
    if (!init_line_) error(1, 1, "missing 'init' directive");
    const auto present = [&](std::string_view w) {
      return std::any_of(body_.begin(), body_.end(), [&](const Line* l) { return l->tokens[0].text == w; });
    };
    if (!present("stage")) error(1, 1, "missing 'stage' directive");
    if (*model_ == Model::Balls && !present("ball")) error(1, 1, "missing 'ball' directive");
  }

  void interpret_init(const Line& line) {
    const auto& head = line.tokens[0];
    if (*model_ != Model::Balls) {
      if (auto v = angle_arg(line, 1)) init_angle_ = *v;
      return;
    }
    if (line.tokens.size() == 2 && line.tokens[1].text == "all") return;
    if (line.tokens.size() < 3 || line.tokens[1].text != "where") {
      error(line.number, head.column, "expected 'init all' or 'init where <attr>=<value> [and ...]'");
      return;
    }
    for (std::size_t i = 2; i < line.tokens.size(); ++i) {
      if ((i - 2) % 2 == 1) {
        if (line.tokens[i].text != "and") {
          error(line.number, line.tokens[i].column, "expected 'and', got '" + std::string(line.tokens[i].text) + "'");
          return;
        }
        if (i + 1 == line.tokens.size()) {
          error(line.number, line.tokens[i].column, "dangling 'and'");
          return;
        }
        continue;
      }
      if (auto t = pair(line, line.tokens[i])) {
        init_filter_.push_back(*t);
        init_filter_columns_.push_back(line.tokens[i].column);
      }
    }
  }

  void interpret_stage(const Line& line) {
    const auto& head = line.tokens[0];
    if (!init_line_ || init_line_->line > line.number) {
      error(line.number, head.column, "stage before init");
      return;
    }
    if (line.tokens.size() < 3 || !is_word(line.tokens[1].text)) {
      error(line.number, head.column, "expected 'stage <label> <kind> ...'");
      return;
    }
    const std::string label(line.tokens[1].text);
    const auto kind = line.tokens[2].text;
    const std::string_view expected =
        *model_ == Model::Photon ? "filter" : (*model_ == Model::Spin ? "sg" : "observe");
    if (kind != expected) {
      error(line.number, line.tokens[2].column,
            "stage kind '" + std::string(kind) + "' does not fit this model (expected '" +
                std::string(expected) + "')");
      return;
    }
    for (const auto& l : stage_labels_) {
      if (l == label) {
        error(line.number, line.tokens[1].column, "duplicate stage label '" + label + "'");
        return;
      }
    }
    if (*model_ != Model::Balls) {
      if (auto v = angle_arg(line, 3)) {
        chain_.push_back({label, Angle::degrees(*v)});
        stage_labels_.push_back(label);
        stage_lines_.push_back({line.number, head.column});
      }
      return;
    }
    if (line.tokens.size() < 4 || !is_word(line.tokens[3].text)) {
      error(line.number, line.tokens[2].column, "expected 'observe <attr>'");
      return;
    }
    BallStage st{label, std::string(line.tokens[3].text), {}};
    std::size_t observe_column = line.tokens[3].column;
    std::size_t refill_column = 0;
    const std::size_t n = line.tokens.size();
    if (n > 4) {
      if (line.tokens[4].text != "refill") {
        error(line.number, line.tokens[4].column, "expected 'refill', got '" + std::string(line.tokens[4].text) + "'");
        return;
      }
      if (n == 6 && line.tokens[5].text == "remove") {
        st.refill = {RefillKind::RemoveDrawn, {}};
      } else if (n == 6 && line.tokens[5].text == "none") {
        st.refill = {RefillKind::None, {}};
      } else if (n == 7 && line.tokens[5].text == "by" && is_word(line.tokens[6].text)) {
        st.refill = {RefillKind::ByOutcome, std::string(line.tokens[6].text)};
        refill_column = line.tokens[6].column;
      } else {
        error(line.number, line.tokens[4].column, "expected 'refill by <attr>', 'refill remove' or 'refill none'");
        return;
      }
    }
    balls_stages_.push_back(std::move(st));
    stage_labels_.push_back(label);
    stage_lines_.push_back({line.number, head.column});
    attribute_refs_.push_back({balls_stages_.back().observe, {line.number, observe_column}});
    if (refill_column) attribute_refs_.push_back({balls_stages_.back().refill.attribute, {line.number, refill_column}});
  }

  void interpret_ball(const Line& line) {
    const auto& head = line.tokens[0];
    if (*model_ != Model::Balls) {
      error(line.number, head.column, "'ball' is only valid with 'model balls'");
      return;
    }
    if (line.tokens.size() < 3 || !is_word(line.tokens[1].text)) {
      error(line.number, head.column, "expected 'ball <id> <attr>=<value> ...'");
      return;
    }
    Ball b{std::string(line.tokens[1].text), {}};
    for (const auto& other : balls_) {
      if (other.id == b.id) {
        error(line.number, line.tokens[1].column, "duplicate ball id '" + b.id + "'");
        return;
      }
    }
    for (std::size_t i = 2; i < line.tokens.size(); ++i) {
      auto t = pair(line, line.tokens[i]);
      if (!t) return;
      if (!b.attributes.emplace(t->attribute, t->value).second) {
        error(line.number, line.tokens[i].column, "attribute '" + t->attribute + "' repeated");
        return;
      }
    }
    balls_.push_back(std::move(b));
  }

  bool attribute_known(const std::string& attr) const {
    return std::any_of(balls_.begin(), balls_.end(),
                       [&](const Ball& b) { return b.attributes.contains(attr); });
  }

  void build(ParseResult& result) {
    Context ctx;
    try {
      ctx = Context(id_, description_);
    } catch (const Error& e) {
      error(experiment_line_->line, experiment_line_->column, e.what());
      return;
    }
    ExperimentSpec spec;
    switch (*model_) {
      case Model::Photon:
        spec = PhotonChainSpec{ctx, Angle::degrees(init_angle_), chain_};
        break;
      case Model::Spin:
        spec = SpinChainSpec{ctx, Angle::degrees(init_angle_), chain_};
        break;
      case Model::Balls: {
        for (std::size_t i = 0; i < init_filter_.size(); ++i) {
          if (!attribute_known(init_filter_[i].attribute)) {
            error(init_line_->line, init_filter_columns_[i],
                  "unknown attribute '" + init_filter_[i].attribute + "' in predicate");
          }
        }
        for (const auto& [attr, where] : attribute_refs_) {
          if (!attribute_known(attr)) error(where.line, where.column, "unknown attribute '" + attr + "'");
        }
        if (has_errors()) return;
        spec = BallsProcessSpec{ctx, balls_, init_filter_, balls_stages_};
        break;
      }
    }
    try {
      validate_spec(spec);
    } catch (const Error& e) {
      Located where = *experiment_line_;
      if (e.stage() && *e.stage() < stage_lines_.size()) where = stage_lines_[*e.stage()];
      else if (e.kind() == ErrorKind::EmptyBoxReached && init_line_) where = *init_line_;
      error(where.line, where.column, e.what());
      return;
    }
    result.spec = std::move(spec);
  }

  std::vector<Line> lines_;
  std::vector<ParseDiagnostic> diags_;
  std::vector<const Line*> body_;

  std::optional<Located> experiment_line_, description_line_, model_line_, init_line_;
  std::string id_;
  std::string description_;
  std::optional<Model> model_;

  double init_angle_ = 0.0;
  std::vector<ChainStage> chain_;

  std::vector<Ball> balls_;
  std::vector<AttributeTest> init_filter_;
  std::vector<std::size_t> init_filter_columns_;
  std::vector<BallStage> balls_stages_;
  std::vector<std::pair<std::string, Located>> attribute_refs_;

  std::vector<std::string> stage_labels_;
  std::vector<Located> stage_lines_;
};

inline std::pair<std::size_t, std::size_t> line_column_of(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Parses one experiment. Never throws; failures come back as diagnostics
/// ordered by (line, column).
inline ParseResult parse(const SourceFile& src) {
  ParseResult result;
  if (src.text.size() > kMaxSourceBytes) {
    result.diagnostics.push_back({1, 1,
                                  "file is " + std::to_string(src.text.size()) + " bytes; limit is " +
                                      std::to_string(kMaxSourceBytes),
                                  Severity::Error});
    return result;
  }
  if (auto bad = detail::find_invalid_utf8(src.text)) {
    auto [line, column] = detail::line_column_of(src.text, *bad);
    result.diagnostics.push_back({line, column, "invalid UTF-8", Severity::Error});
    return result;
  }
  try {
    return detail::Parser(src.text).run();
  } catch (const std::exception& e) {
    result.spec.reset();
    result.diagnostics.push_back({1, 1, std::string("internal parser failure: ") + e.what(), Severity::Error});
    return result;
  }
}

inline ParseResult parse_text(std::string_view text, std::string path = "<input>") {
  return parse(SourceFile{std::move(path), std::string(text)});
}

/// Reads a file from disk; nullopt if it cannot be opened.
inline std::optional<SourceFile> load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return SourceFile{path, os.str()};
}

namespace detail {

inline std::string number_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

inline void require_word(std::string_view s, std::string_view what) {
  if (!is_word(s)) {
    throw Error(ErrorKind::InvalidSpec, std::string(what) + " '" + std::string(s) +
                                            "' cannot be written as a single token");
  }
}

}  // namespace detail

/// Canonical text for a spec; parse(render(spec)) reproduces spec exactly.
inline std::string render(const ExperimentSpec& spec) {
  validate_spec(spec);
  const Context& ctx = context_of(spec);
  detail::require_word(ctx.id(), "experiment id");
  const auto& desc = ctx.description();
  if (desc.find_first_of("#\n") != std::string::npos || detail::trim(desc) != desc) {
    throw Error(ErrorKind::InvalidSpec, "description cannot be written on one line");
  }
  std::ostringstream os;
  os << "experiment " << ctx.id() << "\n";
  if (!desc.empty()) os << "description " << desc << "\n";
  os << "model " << model_name(spec) << "\n";

  auto chain = [&](Angle init, const std::vector<ChainStage>& stages, std::string_view kind) {
    os << "init angle_deg=" << detail::number_text(init.deg()) << "\n";
    for (const auto& s : stages) {
      detail::require_word(s.label, "stage label");
      os << "stage " << s.label << " " << kind << " angle_deg=" << detail::number_text(s.angle.deg()) << "\n";
    }
  };

  if (const auto* p = std::get_if<PhotonChainSpec>(&spec)) {
    chain(p->init_polarization, p->filters, "filter");
  } else if (const auto* s = std::get_if<SpinChainSpec>(&spec)) {
    chain(s->init_axis, s->sg_axes, "sg");
  } else {
    const auto& b = std::get<BallsProcessSpec>(spec);
    for (const auto& ball : b.universe) {
      detail::require_word(ball.id, "ball id");
      if (ball.attributes.empty()) throw Error(ErrorKind::InvalidSpec, "ball '" + ball.id + "' has no attributes");
      os << "ball " << ball.id;
      for (const auto& [k, v] : ball.attributes) {
        detail::require_word(k, "attribute");
        detail::require_word(v, "attribute value");
        os << " " << k << "=" << v;
      }
      os << "\n";
    }
    if (b.init_filter.empty()) {
      os << "init all\n";
    } else {
      os << "init where";
      for (std::size_t i = 0; i < b.init_filter.size(); ++i) {
        if (i) os << " and";
        os << " " << b.init_filter[i].attribute << "=" << b.init_filter[i].value;
      }
      os << "\n";
    }
    for (const auto& st : b.stages) {
      detail::require_word(st.label, "stage label");
      detail::require_word(st.observe, "attribute");
      os << "stage " << st.label << " observe " << st.observe << " refill ";
      switch (st.refill.kind) {
        case RefillKind::None: os << "none"; break;
        case RefillKind::RemoveDrawn: os << "remove"; break;
        case RefillKind::ByOutcome:
          detail::require_word(st.refill.attribute, "attribute");
          os << "by " << st.refill.attribute;
          break;
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace ctxent::dsl
