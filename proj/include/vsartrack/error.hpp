#pragma once

#include <stdexcept>
#include <string>

namespace vsartrack {

// Exit-code classes used by the command-line tool:
//   std::invalid_argument -> 1 (usage / parameter range)
//   FormatError           -> 2 (missing file, malformed data)
//   NumericalError        -> 3 (factorization failure, non-finite data)

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vsartrack
