#pragma once

#include <stdexcept>
#include <string>

namespace qbell {

// Violated numerical contract: non-Hermitian input, invalid density matrix,
// infeasible constraint set, ... The CLI maps this family to exit code 1.
class contract_error : public std::runtime_error {
public:
    explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension or size outside the supported range; a usage error, exit code 2.
class size_error : public std::invalid_argument {
public:
    explicit size_error(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace qbell
