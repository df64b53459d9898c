#include "rlab/corpus/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"

namespace rlab::corpus {

SentencePair::SentencePair(Tokens source, Tokens target, Provenance provenance)
    : source_(std::move(source)), target_(std::move(target)), provenance_(std::move(provenance)) {
  if (source_.empty() || target_.empty()) {
    throw FormatError("sentence pair with an empty side");
  }
}

std::vector<Tokens> Corpus::sources() const {
  std::vector<Tokens> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.source());
  return out;
}

std::vector<Tokens> Corpus::targets() const {
  std::vector<Tokens> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.target());
  return out;
}

Corpus Corpus::subset(std::string id, const std::vector<std::size_t>& indices) const {
  std::vector<SentencePair> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= pairs_.size()) throw SizeError("subset index " + std::to_string(i) + " out of range");
    picked.push_back(pairs_[i]);
  }
  return Corpus(std::move(id), std::move(picked));
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

LoadResult load_parallel_corpus(const std::filesystem::path& path, CorpusFormat format) {
  (void)format;  // TSV is the only format
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  LoadResult result;
  std::vector<SentencePair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos ||
        !is_valid_utf8(line)) {
      ++result.skipped;
      continue;
    }
    Tokens src = tokenize(std::string_view(line).substr(0, tab));
    Tokens tgt = tokenize(std::string_view(line).substr(tab + 1));
    if (src.empty() || tgt.empty()) {
      ++result.skipped;
      continue;
    }
    pairs.emplace_back(std::move(src), std::move(tgt));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (pairs.empty()) throw EmptyCorpus("no valid sentence pairs in " + path.string());
  result.corpus = Corpus(path.stem().string(), std::move(pairs));
  return result;
}

void save_parallel_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : corpus.pairs()) {
    out << join(p.source()) << '\t' << join(p.target()) << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<Corpus> split_corpus(const Corpus& corpus, std::uint64_t seed,
                                 const std::vector<std::size_t>& sizes) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total > corpus.size()) {
    throw SizeError("requested " + std::to_string(total) + " pairs from a corpus of " +
                    std::to_string(corpus.size()));
  }
  auto order = iota_indices(corpus.size());
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Corpus> parts;
  parts.reserve(sizes.size());
  std::size_t offset = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                 order.begin() + static_cast<std::ptrdiff_t>(offset + sizes[k]));
    parts.push_back(corpus.subset(corpus.id() + "/part" + std::to_string(k), idx));
    offset += sizes[k];
  }
  return parts;
}

}  // namespace rlab::corpus
