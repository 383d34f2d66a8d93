#pragma once

// Fixtures and record builders shared by the unit tests and the acceptance
// binary.

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cptrie/cp_trie.hpp"
#include "cptrie/dist_io.hpp"

namespace cptrie::testing {

std::filesystem::path data_path(const std::string& name);
std::filesystem::path oracle_path(const std::string& name);
std::string slurp(const std::filesystem::path& path);

// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

// Builds the trie for the bundled corpus the way build-trie does.
struct FixtureBuild {
  CpTrie trie;
  std::size_t accepted = 0;
  std::size_t total = 0;
  std::size_t unknown_word = 0;
};
FixtureBuild build_fixture(const std::vector<std::string>& files = {});
std::vector<std::string> fixture_files();

// Exact entropy (nats) of a probability vector, ignoring zeros.
double entropy_of(const std::vector<double>& probs);

// Record with surfaces "t1", "t2", ... and entropy computed from the listed
// probabilities plus the tail spread over the unlisted vocabulary.
DistributionRecord make_record(const std::vector<double>& probs, double tail = 0.0, std::size_t vocab = 0,
                               const std::string& prefix_id = "p");

// Random sorted distribution over n listed tokens; with `tail` false the
// listed tokens carry all the mass and V = n.
DistributionRecord random_record(std::mt19937& rng, std::size_t n, bool tail = false);

// p_i proportional to i^-s over V tokens, all listed.
DistributionRecord zipf_record(double s, std::size_t vocab);

// A toy record with `pad` word-initial filler tokens appended below the
// support so that top-k cuts up to |support| + pad are not clamped.
DistributionRecord padded_toy_record(const DistributionRecord& toy, std::size_t pad);

}  // namespace cptrie::testing
