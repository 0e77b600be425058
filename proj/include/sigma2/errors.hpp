#ifndef SIGMA2_ERRORS_HPP
#define SIGMA2_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sigma2 {

// Error taxonomy. invalid_input maps to CLI exit 2, everything else to exit 3.
enum class errc {
  invalid_input,
  numeric_failure,
  degenerate_gradient,
  domain_error,
  no_root,
  multi_root,
  stiffness,
  cone_violation,
  insufficient_data,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_input: return "invalid-input";
    case errc::numeric_failure: return "numeric-failure";
    case errc::degenerate_gradient: return "degenerate-gradient";
    case errc::domain_error: return "domain-error";
    case errc::no_root: return "no-root";
    case errc::multi_root: return "multi-root";
    case errc::stiffness: return "stiffness";
    case errc::cone_violation: return "cone-violation";
    case errc::insufficient_data: return "insufficient-data";
  }
  return "unknown";
}

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sigma2

#endif
