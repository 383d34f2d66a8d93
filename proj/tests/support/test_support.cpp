#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "cptrie/corpus_ingest.hpp"

namespace cptrie::testing {

namespace fs = std::filesystem;

fs::path data_path(const std::string& name) { return fs::path(CPTRIE_TEST_DATA) / name; }
fs::path oracle_path(const std::string& name) { return fs::path(CPTRIE_ORACLE_DIR) / name; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("cptrie_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> fixture_files() {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(data_path("corpus"))) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

FixtureBuild build_fixture(const std::vector<std::string>& files) {
  const WordList words = load_word_list(data_path("wordlist.txt"));
  const Ingestor ingestor(words, IngestConfig{});
  FixtureBuild build;
  IngestCounters counters;
  for (const auto& file : files.empty() ? fixture_files() : files) {
    for (const auto& s : ingestor.ingest(slurp(file), file, counters)) build.trie.insert(s);
  }
  build.accepted = counters.accepted;
  build.total = counters.total;
  build.unknown_word = counters.unknown_word;
  return build;
}

double entropy_of(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

DistributionRecord make_record(const std::vector<double>& probs, double tail, std::size_t vocab,
                               const std::string& prefix_id) {
  DistributionRecord r;
  r.prefix_id = prefix_id;
  r.vocab_size = vocab == 0 ? probs.size() : vocab;
  r.tail_mass = tail;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    r.tokens.push_back(TokenEntry{i + 1, "t" + std::to_string(i + 1), true, probs[i]});
  }
  r.entropy_nats = entropy_of(probs);
  const std::size_t unlisted = r.vocab_size - probs.size();
  if (tail > 0.0 && unlisted > 0) r.entropy_nats += tail * std::log(static_cast<double>(unlisted) / tail);
  return r;
}

DistributionRecord random_record(std::mt19937& rng, std::size_t n, bool tail) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.05, 0.5);
  std::vector<double> w(n);
  for (auto& x : w) x = std::pow(expo(rng), 3.0) + 1e-6;
  std::sort(w.begin(), w.end(), std::greater<>());
  const double tail_mass = tail ? unit(rng) : 0.0;
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x = x / sum * (1.0 - tail_mass);
  const std::size_t vocab = tail ? n + 1 + n * 4 : n;
  return make_record(w, tail_mass, vocab);
}

DistributionRecord zipf_record(double s, std::size_t vocab) {
  std::vector<double> p(vocab);
  for (std::size_t i = 0; i < vocab; ++i) p[i] = std::pow(static_cast<double>(i + 1), -s);
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= z;
  return make_record(p, 0.0, vocab, "zipf");
}

DistributionRecord padded_toy_record(const DistributionRecord& toy, std::size_t pad) {
  constexpr double kSupportShare = 0.75;
  DistributionRecord r = toy;
  std::vector<double> probs;
  for (auto& t : r.tokens) {
    t.prob *= kSupportShare;
    probs.push_back(t.prob);
  }
  const double filler = (1.0 - kSupportShare) / static_cast<double>(pad);
  if (probs.back() < filler) throw std::runtime_error("padding would reorder " + toy.prefix_id);
  for (std::size_t i = 0; i < pad; ++i) {
    r.tokens.push_back(TokenEntry{r.tokens.size() + 1, "~" + std::to_string(i + 1), true, filler});
    probs.push_back(filler);
  }
  r.vocab_size = r.tokens.size();
  r.entropy_nats = entropy_of(probs);
  return r;
}

}  // namespace cptrie::testing
