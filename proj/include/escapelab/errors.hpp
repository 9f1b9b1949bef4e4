#ifndef ESCAPELAB_ERRORS_HPP
#define ESCAPELAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace escapelab {

// Base error carrying a stable machine-readable code for CLI reports.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string& what) : Error("invalid_spec", what) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error("usage_error", what) {}
};

// A residue stream was truncated where an exact one was required.
struct InexactTail : Error {
    explicit InexactTail(const std::string& what) : Error("inexact_tail", what) {}
};

struct NoCertificate : Error {
    explicit NoCertificate(const std::string& what) : Error("no_certificate", what) {}
};

struct SpectrumOnCut : Error {
    explicit SpectrumOnCut(const std::string& what) : Error("spectrum_on_cut", what) {}
};

struct NotDiagonalizable : Error {
    explicit NotDiagonalizable(const std::string& what) : Error("not_diagonalizable", what) {}
};

struct ConvergenceFailure : Error {
    explicit ConvergenceFailure(const std::string& what) : Error("convergence_failure", what) {}
};

struct RankTooLarge : Error {
    explicit RankTooLarge(const std::string& what) : Error("rank_too_large", what) {}
};

struct NegativeRealInRange : Error {
    explicit NegativeRealInRange(const std::string& what) : Error("negative_real_in_range", what) {}
};

}  // namespace escapelab

#endif
