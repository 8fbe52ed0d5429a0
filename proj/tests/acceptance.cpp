// One PASS/FAIL line per acceptance criterion; nonzero exit on any failure.
//   acceptance                 run every criterion
//   acceptance <name>...       run the named criteria only
//   acceptance --update-golden rewrite the pinned compositor PNG and exit

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "criteria.hpp"

namespace {

struct Criterion {
  const char* name;
  memebot::criteria::Outcome (*run)();
};

const std::vector<Criterion>& all_criteria() {
  using namespace memebot::criteria;
  static const std::vector<Criterion> list = {
      {"gradient_check", gradient_suite},
      {"decode_oracle", decode_oracle},
      {"overfit", overfit_oracle},
      {"metric_oracles", metric_oracles},
      {"corruption_invariants", corruption_invariants},
      {"decoding_contract", decoding_contract},
      {"config_fidelity", config_fidelity},
      {"serialization", serialization},
      {"split", split_contract},
      {"service", service_integration},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--update-golden") {
      const auto path = memebot::criteria::golden_png_path();
      std::filesystem::create_directories(path.parent_path());
      memebot::write_file(path, memebot::criteria::golden_png_bytes());
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }
    only.push_back(arg);
  }
  int failures = 0;
  std::size_t ran = 0;
  for (const auto& c : all_criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    memebot::criteria::Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("threw: ") + e.what();
    }
    const double secs = memebot::criteria::seconds_since(t0);
    std::printf("%s %-22s [%6.1fs] %s\n", out.pass ? "PASS" : "FAIL", c.name, secs, out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::cerr << "no criterion matched\n";
    return 2;
  }
  std::printf("%zu/%zu criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
