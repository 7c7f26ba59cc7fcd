#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "geomech/sampling.hpp"

namespace geomech::verify {

// Which side of the tolerance a passing residual lies on.
enum class Bound { Upper, Lower };

struct Outcome {
  double residual = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::Upper;
  bool extra_ok = true;  // side conditions that do not reduce to the residual
  std::string detail;
};

struct CheckDef {
  std::string id;
  std::string reference;
  int criterion = 0;
  std::function<Outcome(Rng&)> run;
};

enum class Status { Pass, Fail, Error };

std::string to_string(Status status);

struct CheckResult {
  std::string id;
  std::string reference;
  int criterion = 0;
  Status status = Status::Error;
  Outcome outcome;
  std::uint64_t seed = 0;
  std::string error;  // error code and message when status is Error
  double seconds = 0.0;
};

// Every check, sorted by id.
const std::vector<CheckDef>& catalog();

// Checks whose id equals `suite` or starts with `suite.`; "all" selects everything.
std::vector<const CheckDef*> select(std::string_view suite);
std::vector<const CheckDef*> select(int criterion);

std::uint64_t splitmix64(std::uint64_t& state);
// Per-check seed: independent of scheduling and of which other checks run.
std::uint64_t check_seed(std::uint64_t base, std::string_view id);

CheckResult run_check(const CheckDef& check, std::uint64_t base_seed);
// Runs on up to `threads` workers; results come back in catalog order.
std::vector<CheckResult> run_checks(const std::vector<const CheckDef*>& checks, std::uint64_t base_seed,
                                    unsigned threads);

}  // namespace geomech::verify
