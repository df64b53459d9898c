#include "rlab/corpus/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "rlab/common/error.hpp"

namespace rlab::corpus {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Stemmer::Stemmer(std::vector<Rule> rules, std::size_t min_stem)
    : rules_(std::move(rules)), min_stem_(min_stem) {
  for (const auto& r : rules_) {
    if (r.suffix.empty()) throw ConfigError("stemmer rule with empty suffix");
    const bool guard = r.suffix == r.replacement;
    if (!guard && r.replacement.size() >= r.suffix.size()) {
      throw ConfigError("stemmer rule '" + r.suffix + "' -> '" + r.replacement + "' does not shorten");
    }
  }
  std::stable_sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) {
    return a.suffix.size() > b.suffix.size();
  });
}

Stemmer Stemmer::load(const std::filesystem::path& path, std::size_t min_stem) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stemmer rules " + path.string());
  std::vector<Rule> rules;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      rules.push_back({line, ""});
    } else {
      rules.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
  }
  return Stemmer(std::move(rules), min_stem);
}

Stemmer Stemmer::english() {
  return Stemmer({{"sses", "ss"},
                  {"ss", "ss"},
                  {"ies", "y"},
                  {"ied", "y"},
                  {"ing", ""},
                  {"edly", ""},
                  {"ed", ""},
                  {"ly", ""},
                  {"ness", ""},
                  {"ful", ""},
                  {"s", ""}});
}

std::string Stemmer::stem(const std::string& word) const {
  std::string w = word;
  for (;;) {
    const Rule* hit = nullptr;
    for (const auto& r : rules_) {
      if (ends_with(w, r.suffix) && w.size() - r.suffix.size() >= min_stem_) {
        hit = &r;
        break;
      }
    }
    if (hit == nullptr || hit->suffix == hit->replacement) return w;
    w = w.substr(0, w.size() - hit->suffix.size()) + hit->replacement;
  }
}

PreprocessOptions PreprocessOptions::all(std::set<std::string> stopwords) {
  PreprocessOptions o;
  o.lowercase = o.strip_punctuation = o.remove_stopwords = o.stem = true;
  o.stopwords = std::move(stopwords);
  return o;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

Tokens preprocess_sentence(const Tokens& text, const PreprocessOptions& opts) {
  Tokens out;
  out.reserve(text.size());
  for (std::string tok : text) {
    if (opts.lowercase) {
      for (char& c : tok) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
      }
    }
    if (opts.strip_punctuation) {
      std::erase_if(tok, [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u < 0x80 && std::ispunct(u);
      });
      if (tok.empty()) continue;
    }
    const std::string stemmed = opts.stem ? opts.stemmer.stem(tok) : tok;
    if (opts.remove_stopwords &&
        (opts.stopwords.contains(tok) || opts.stopwords.contains(stemmed))) {
      continue;
    }
    out.push_back(stemmed);
  }
  return out;
}

std::vector<Tokens> preprocess_all(const std::vector<Tokens>& texts, const PreprocessOptions& opts) {
  std::vector<Tokens> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(preprocess_sentence(t, opts));
  return out;
}

}  // namespace rlab::corpus
