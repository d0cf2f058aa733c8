#include "qa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "qa/errors.hpp"
#include "qa/text.hpp"

namespace qa {

namespace {

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int month_length(int year, int month) {
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap(year)) return 29;
  return days[month - 1];
}

std::string format_decimal(double value) {
  if (value == static_cast<long long>(value) && std::abs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

bool parse_size(std::string_view text, std::size_t& out) {
  if (text.empty()) return false;
  std::size_t v = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  out = v;
  return true;
}

bool parse_int(std::string_view text, int& out) {
  std::size_t v = 0;
  if (!parse_size(text, v)) return false;
  out = static_cast<int>(v);
  return true;
}

bool parse_double(std::string_view text, double& out) {
  auto result = std::from_chars(text.data(), text.data() + text.size(), out);
  return result.ec == std::errc() && result.ptr == text.data() + text.size();
}

}  // namespace

bool date_valid(const date& d) {
  if (d.day && !d.month) return false;
  if (d.month && (*d.month < 1 || *d.month > 12)) return false;
  if (d.day) {
    if (*d.day < 1 || *d.day > month_length(d.year, *d.month)) return false;
  }
  return true;
}

std::array<int, 3> date_key(const date& d) {
  return {d.year, d.month.value_or(6), d.day.value_or(15)};
}

std::string date_to_string(const date& d) {
  char buf[32];
  if (d.day)
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, *d.month, *d.day);
  else if (d.month)
    std::snprintf(buf, sizeof(buf), "%04d-%02d", d.year, *d.month);
  else
    std::snprintf(buf, sizeof(buf), "%04d", d.year);
  return buf;
}

std::optional<date> date_from_string(std::string_view text) {
  date d;
  std::size_t first = text.find('-');
  std::string_view year_part = text.substr(0, first);
  if (!parse_int(year_part, d.year)) return std::nullopt;
  if (first != std::string_view::npos) {
    std::string_view rest = text.substr(first + 1);
    std::size_t second = rest.find('-');
    int month = 0;
    if (!parse_int(rest.substr(0, second), month)) return std::nullopt;
    d.month = month;
    if (second != std::string_view::npos) {
      int day = 0;
      if (!parse_int(rest.substr(second + 1), day)) return std::nullopt;
      d.day = day;
    }
  }
  if (!date_valid(d)) return std::nullopt;
  return d;
}

const char* mention_kind_name(mention_kind kind) {
  switch (kind) {
    case mention_kind::name: return "name";
    case mention_kind::event: return "event";
    case mention_kind::noun_phrase: return "noun_phrase";
    case mention_kind::number: return "number";
    case mention_kind::ordinal: return "ordinal";
    case mention_kind::date: return "date";
  }
  return "?";
}

std::optional<mention_kind> mention_kind_from(std::string_view name) {
  static const std::unordered_map<std::string_view, mention_kind> map = {
      {"name", mention_kind::name},           {"event", mention_kind::event},
      {"noun_phrase", mention_kind::noun_phrase}, {"number", mention_kind::number},
      {"ordinal", mention_kind::ordinal},     {"date", mention_kind::date},
  };
  auto it = map.find(name);
  if (it == map.end()) return std::nullopt;
  return it->second;
}

std::vector<span_range> split_sentences(std::string_view text) {
  // byte scan with a code point map; terminator and capital checks are ASCII
  std::vector<std::size_t> cp_of(text.size() + 1, 0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool starts = (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80;
    cp_of[i + 1] = cp_of[i] + (starts ? 1 : 0);
  }

  std::vector<span_range> sentences;
  auto skip_ws = [&](std::size_t from) {
    while (from < text.size() && std::isspace(static_cast<unsigned char>(text[from]))) ++from;
    return from;
  };
  std::size_t start = skip_ws(0);
  std::size_t i = start;
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t after = i + 1;
      // consume a run of closing punctuation ("?!", "...")
      while (after < text.size() &&
             (text[after] == '.' || text[after] == '!' || text[after] == '?'))
        ++after;
      std::size_t next = skip_ws(after);
      bool boundary = next >= text.size() ||
                      (next > after && std::isupper(static_cast<unsigned char>(text[next])));
      if (boundary) {
        if (after > start) sentences.push_back({cp_of[start], cp_of[after]});
        start = next;
        i = next;
        continue;
      }
      i = after;
      continue;
    }
    ++i;
  }
  if (start < text.size()) sentences.push_back({cp_of[start], cp_of[text.size()]});
  return sentences;
}

int sentence_of(const annotated_paragraph& para, const span_range& span) {
  for (std::size_t i = 0; i < para.sentences.size(); ++i) {
    if (span.begin >= para.sentences[i].begin && span.begin < para.sentences[i].end)
      return static_cast<int>(i);
  }
  return -1;
}

annotated_paragraph make_paragraph(std::string id, std::string text,
                                   std::vector<mention> mentions) {
  annotated_paragraph para;
  para.id = std::move(id);
  para.text = std::move(text);
  para.sentences = split_sentences(para.text);
  para.mentions = std::move(mentions);
  for (auto& m : para.mentions) {
    if (m.surface.empty()) m.surface = cp_slice(para.text, m.span.begin, m.span.end);
  }
  return para;
}

std::vector<std::string> validate_paragraph(const annotated_paragraph& para) {
  std::vector<std::string> violations;
  const std::size_t len = cp_length(para.text);
  for (std::size_t i = 0; i < para.mentions.size(); ++i) {
    const mention& m = para.mentions[i];
    std::string where = "mention " + std::to_string(i);
    if (m.span.begin >= m.span.end) {
      violations.push_back(where + ": EmptySpan");
      continue;
    }
    if (m.span.end > len) {
      violations.push_back(where + ": SpanOutOfBounds");
      continue;
    }
    std::string slice = cp_slice(para.text, m.span.begin, m.span.end);
    if (slice != m.surface) violations.push_back(where + ": SurfaceMismatch '" + m.surface +
                                                 "' vs text '" + slice + "'");
    if (m.kind == mention_kind::number && !m.number)
      violations.push_back(where + ": NumberMissing");
    if (m.kind == mention_kind::date && m.dates.empty())
      violations.push_back(where + ": DatesMissing");
    for (const date& d : m.dates) {
      if (!date_valid(d)) violations.push_back(where + ": InvalidDate " + date_to_string(d));
    }
    if (m.link) {
      if (m.link->target.begin >= m.link->target.end || m.link->target.end > len)
        violations.push_back(where + ": LinkOutOfBounds");
      if (m.link->role.empty()) violations.push_back(where + ": LinkRoleEmpty");
    }
    bool covered = false;
    for (const auto& s : para.sentences) {
      if (m.span.begin >= s.begin && m.span.end <= s.end) {
        covered = true;
        break;
      }
    }
    if (!covered) violations.push_back(where + ": SpanOutsideSentences");
  }
  return violations;
}

namespace {

std::vector<std::string_view> split_ws_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t begin = i;
    while (i < line.size() && line[i] != ' ') ++i;
    fields.push_back(line.substr(begin, i - begin));
  }
  return fields;
}

bool parse_span_field(std::string_view text, span_range& out) {
  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) return false;
  return parse_size(text.substr(0, colon), out.begin) &&
         parse_size(text.substr(colon + 1), out.end) && out.begin < out.end;
}

mention parse_mention_line(std::string_view line, std::size_t line_number) {
  auto bad = [&](const std::string& reason) -> void {
    fail(errc::format_error, "line " + std::to_string(line_number) + ": " + reason);
  };
  auto fields = split_ws_fields(line);
  if (fields.size() < 3 || fields[0] != "#MENTION") bad("expected #MENTION <span> kind=...");
  mention m;
  if (!parse_span_field(fields[1], m.span)) bad("bad span '" + std::string(fields[1]) + "'");
  bool have_kind = false;
  for (std::size_t i = 2; i < fields.size(); ++i) {
    std::string_view field = fields[i];
    std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) bad("bad attribute '" + std::string(field) + "'");
    std::string_view key = field.substr(0, eq);
    std::string_view value = field.substr(eq + 1);
    if (key == "kind") {
      auto kind = mention_kind_from(value);
      if (!kind) bad("unknown kind '" + std::string(value) + "'");
      m.kind = *kind;
      have_kind = true;
    } else if (key == "num") {
      number_value nv;
      std::size_t colon = value.find(':');
      std::string_view num_part = value.substr(0, colon);
      if (!parse_double(num_part, nv.value)) bad("bad number '" + std::string(value) + "'");
      if (colon != std::string_view::npos) nv.unit = std::string(value.substr(colon + 1));
      m.number = nv;
    } else if (key == "date") {
      auto d = date_from_string(value);
      if (!d) bad("bad date '" + std::string(value) + "'");
      m.dates.push_back(*d);
    } else if (key == "link") {
      std::size_t first = value.find(':');
      std::size_t second = first == std::string_view::npos ? first : value.find(':', first + 1);
      if (second == std::string_view::npos) bad("bad link '" + std::string(value) + "'");
      mention_link link;
      if (!parse_span_field(value.substr(0, second), link.target))
        bad("bad link span '" + std::string(value) + "'");
      link.role = std::string(value.substr(second + 1));
      if (link.role.empty()) bad("empty link role");
      m.link = link;
    } else {
      bad("unknown attribute '" + std::string(key) + "'");
    }
  }
  if (!have_kind) bad("mention without kind");
  return m;
}

}  // namespace

std::vector<annotated_paragraph> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);
  std::vector<annotated_paragraph> corpus;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_number = 0;
  annotated_paragraph current;
  bool in_record = false;
  bool have_text = false;

  auto finish = [&]() {
    if (!in_record) return;
    if (!have_text)
      fail(errc::format_error, "paragraph " + current.id + " has no text line");
    current.sentences = split_sentences(current.text);
    for (auto& m : current.mentions)
      m.surface = cp_slice(current.text, m.span.begin, m.span.end);
    auto violations = validate_paragraph(current);
    if (!violations.empty())
      fail(errc::validation_error, current.id + ": " + violations.front());
    corpus.push_back(std::move(current));
    current = {};
    in_record = false;
    have_text = false;
  };

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line.rfind("#PARA ", 0) == 0) {
      finish();
      in_record = true;
      current.id = line.substr(6);
      if (current.id.empty())
        fail(errc::format_error, "line " + std::to_string(line_number) + ": empty paragraph id");
      if (!seen_ids.insert(current.id).second)
        fail(errc::format_error,
             "line " + std::to_string(line_number) + ": duplicate paragraph id " + current.id);
      continue;
    }
    if (!in_record)
      fail(errc::format_error, "line " + std::to_string(line_number) + ": content outside record");
    if (line.rfind("#MENTION ", 0) == 0) {
      if (!have_text)
        fail(errc::format_error,
             "line " + std::to_string(line_number) + ": mention before paragraph text");
      current.mentions.push_back(parse_mention_line(line, line_number));
      continue;
    }
    if (have_text)
      fail(errc::format_error,
           "line " + std::to_string(line_number) + ": second text line in one record");
    current.text = line;
    have_text = true;
  }
  finish();
  return corpus;
}

void write_corpus(const std::string& path, const std::vector<annotated_paragraph>& corpus) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& para = corpus[i];
    if (i > 0) out << "\n";
    out << "#PARA " << para.id << "\n" << para.text << "\n";
    for (const auto& m : para.mentions) {
      out << "#MENTION " << m.span.begin << ":" << m.span.end
          << " kind=" << mention_kind_name(m.kind);
      if (m.number) {
        out << " num=" << format_decimal(m.number->value);
        if (!m.number->unit.empty()) out << ":" << m.number->unit;
      }
      for (const date& d : m.dates) out << " date=" << date_to_string(d);
      if (m.link)
        out << " link=" << m.link->target.begin << ":" << m.link->target.end << ":"
            << m.link->role;
      out << "\n";
    }
  }
}

const std::vector<std::string>& unit_lexicon() {
  static const std::vector<std::string> units = {"yard", "yards", "point", "points",
                                                 "percent", "year", "years"};
  return units;
}

namespace {

const std::vector<std::string>& ordinal_lexicon() {
  static const std::vector<std::string> ordinals = {"first", "second", "third", "fourth",
                                                    "fifth", "sixth", "seventh", "eighth",
                                                    "ninth", "tenth"};
  return ordinals;
}

int month_from_name(const std::string& lower) {
  static const std::unordered_map<std::string, int> months = {
      {"january", 1}, {"february", 2}, {"march", 3},     {"april", 4},
      {"may", 5},     {"june", 6},     {"july", 7},      {"august", 8},
      {"september", 9}, {"october", 10}, {"november", 11}, {"december", 12}};
  auto it = months.find(lower);
  return it == months.end() ? 0 : it->second;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_plain_number(const std::string& tok, double& value) {
  std::size_t dot = tok.find('.');
  std::string_view sv(tok);
  if (dot != std::string::npos) {
    if (!all_digits(sv.substr(0, dot)) || !all_digits(sv.substr(dot + 1))) return false;
  } else if (!all_digits(sv)) {
    return false;
  }
  return parse_double(sv, value);
}

bool is_bare_year(const std::string& tok, int& year) {
  if (tok.size() != 4 || !all_digits(tok)) return false;
  year = std::stoi(tok);
  return year >= 1000 && year <= 2100;
}

bool is_capitalized(std::string_view raw) {
  if (raw.empty()) return false;
  return std::isupper(static_cast<unsigned char>(raw[0])) != 0;
}

}  // namespace

std::vector<mention> annotate_rule_based(std::string_view text) {
  std::vector<mention> out;
  const auto spans = tokenize_spans(text);
  const std::size_t n = spans.size();

  std::vector<std::string> raw(n), lower(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = cp_slice(text, spans[i].begin, spans[i].end);
    lower[i] = lower_ascii(raw[i]);
  }

  const auto sentences = split_sentences(text);
  auto sentence_index = [&](std::size_t cp) {
    for (std::size_t s = 0; s < sentences.size(); ++s)
      if (cp >= sentences[s].begin && cp < sentences[s].end) return static_cast<int>(s);
    return -1;
  };
  std::vector<bool> sentence_initial(n, false);
  {
    int prev_sentence = -1;
    for (std::size_t i = 0; i < n; ++i) {
      int s = sentence_index(spans[i].begin);
      sentence_initial[i] = (s != prev_sentence);
      prev_sentence = s;
    }
  }

  auto add = [&](std::size_t begin_tok, std::size_t end_tok, mention_kind kind) -> mention& {
    mention m;
    m.span = {spans[begin_tok].begin, spans[end_tok].end};
    m.surface = cp_slice(text, m.span.begin, m.span.end);
    m.kind = kind;
    out.push_back(std::move(m));
    return out.back();
  };

  // dates: month-name patterns first, then bare years
  std::vector<bool> in_date(n, false);
  std::vector<bool> date_sentence(sentences.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    int month = month_from_name(lower[i]);
    if (month == 0) continue;
    int year = 0;
    int day = 0;
    // "January 5, 1999" / "January 5 1999"
    if (i + 2 < n && parse_int(lower[i + 1], day) && day >= 1 && day <= 31 &&
        is_bare_year(lower[i + 2], year)) {
      date d{year, month, day};
      if (!date_valid(d)) continue;
      auto& m = add(i, i + 2, mention_kind::date);
      m.dates.push_back(d);
      in_date[i] = in_date[i + 1] = in_date[i + 2] = true;
    } else if (i + 1 < n && is_bare_year(lower[i + 1], year)) {
      // "December 1948"
      auto& m = add(i, i + 1, mention_kind::date);
      m.dates.push_back(date{year, month, std::nullopt});
      in_date[i] = in_date[i + 1] = true;
    } else if (i >= 1 && i + 1 < n && parse_int(lower[i - 1], day) && day >= 1 && day <= 31 &&
               is_bare_year(lower[i + 1], year)) {
      // "5 March 1999"
      date d{year, month, day};
      if (!date_valid(d)) continue;
      auto& m = add(i - 1, i + 1, mention_kind::date);
      m.dates.push_back(d);
      in_date[i - 1] = in_date[i] = in_date[i + 1] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    int year = 0;
    if (in_date[i] || !is_bare_year(lower[i], year)) continue;
    auto& m = add(i, i, mention_kind::date);
    m.dates.push_back(date{year, std::nullopt, std::nullopt});
    in_date[i] = true;
  }
  for (const auto& m : out) {
    int s = sentence_index(m.span.begin);
    if (s >= 0) date_sentence[static_cast<std::size_t>(s)] = true;
  }

  // numbers: plain and hyphenated forms, skipping tokens inside date spans
  for (std::size_t i = 0; i < n; ++i) {
    if (in_date[i]) continue;
    double value = 0.0;
    std::size_t hyphen = lower[i].find('-');
    if (hyphen != std::string::npos && hyphen > 0) {
      std::string head = lower[i].substr(0, hyphen);
      std::string tail = lower[i].substr(hyphen + 1);
      if (is_plain_number(head, value) && !tail.empty()) {
        auto& m = add(i, i, mention_kind::number);
        m.number = number_value{value, ""};
        const auto& units = unit_lexicon();
        if (std::find(units.begin(), units.end(), tail) != units.end())
          m.number->unit = tail;
        continue;
      }
    }
    if (is_plain_number(lower[i], value)) {
      auto& m = add(i, i, mention_kind::number);
      m.number = number_value{value, ""};
      if (i + 1 < n) {
        const auto& units = unit_lexicon();
        if (std::find(units.begin(), units.end(), lower[i + 1]) != units.end())
          m.number->unit = lower[i + 1];
      }
    }
  }

  // ordinals
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ords = ordinal_lexicon();
    if (std::find(ords.begin(), ords.end(), lower[i]) != ords.end())
      add(i, i, mention_kind::ordinal);
  }

  // names: maximal capitalized runs; a sentence-initial stopword is dropped
  // from the front of a run, tokens inside date spans never start one
  {
    std::size_t i = 0;
    while (i < n) {
      if (!is_capitalized(raw[i]) || in_date[i]) {
        ++i;
        continue;
      }
      std::size_t run_begin = i;
      std::size_t run_end = i;
      while (run_end + 1 < n && is_capitalized(raw[run_end + 1]) && !in_date[run_end + 1])
        ++run_end;
      if (sentence_initial[run_begin] && is_stopword(lower[run_begin])) ++run_begin;
      if (run_begin <= run_end) add(run_begin, run_end, mention_kind::name);
      i = run_end + 1;
    }
  }

  // noun phrases: maximal stopword-delimited runs; also tag them as events
  // when their sentence carries a date
  {
    std::size_t i = 0;
    while (i < n) {
      if (is_stopword(lower[i])) {
        ++i;
        continue;
      }
      std::size_t run_begin = i;
      while (i + 1 < n && !is_stopword(lower[i + 1]) &&
             sentence_index(spans[i + 1].begin) == sentence_index(spans[run_begin].begin))
        ++i;
      add(run_begin, i, mention_kind::noun_phrase);
      int s = sentence_index(spans[run_begin].begin);
      if (s >= 0 && date_sentence[static_cast<std::size_t>(s)])
        add(run_begin, i, mention_kind::event);
      ++i;
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const mention& a, const mention& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    if (a.span.end != b.span.end) return a.span.end < b.span.end;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

entity_catalog catalog(const annotated_paragraph& para) {
  entity_catalog cat;
  for (const auto& m : para.mentions) cat.by_kind[m.kind].push_back(&m);
  for (auto& [kind, list] : cat.by_kind) {
    std::stable_sort(list.begin(), list.end(), [](const mention* a, const mention* b) {
      if (a->span.begin != b->span.begin) return a->span.begin < b->span.begin;
      return a->span.end < b->span.end;
    });
  }
  return cat;
}

}  // namespace qa
