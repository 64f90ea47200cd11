#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bioauth/errors.hpp"
#include "bioauth/registry.hpp"

namespace bioauth::cli {

// Bad command line or arguments; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable file; exit code 3.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Enrolment database file:
//   bioauthdb v1 l=<bits>
//   <label> <id_hex> <secret_hex>
struct EnrolmentDb {
  std::size_t l = 0;
  std::vector<EnrolmentRecord> records;
};

void write_db(std::ostream& out, const EnrolmentDb& db);
// Throws IoError on a malformed file.
EnrolmentDb read_db(std::istream& in);

// Biometric subject behind a label; fixed across runs and seeds.
std::uint64_t subject_seed_for(const std::string& label);

// Runs one command line (without the program name). Never throws; errors
// become messages on `err` and the documented exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bioauth::cli
