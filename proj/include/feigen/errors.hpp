#pragma once

#include <stdexcept>
#include <string>

namespace feigen {

// Root of every failure raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class OverflowError : public Error { public: using Error::Error; };
class ConvergenceError : public Error { public: using Error::Error; };
class BracketError : public Error { public: using Error::Error; };
class SingularError : public Error { public: using Error::Error; };

// domain nests
class NonRenormalizableError : public Error { public: using Error::Error; };
class DegenerateScaleError : public Error { public: using Error::Error; };

// Monte Carlo
class EmptySampleError : public Error { public: using Error::Error; };
class DegenerateAreaError : public Error { public: using Error::Error; };
class NoEventError : public Error { public: using Error::Error; };

// series and measures
class SingularPointError : public Error { public: using Error::Error; };
class InconclusiveError : public Error { public: using Error::Error; };
class DegenerateCriticalOrbitError : public Error { public: using Error::Error; };
class EmptyMeasureError : public Error { public: using Error::Error; };

// trichotomy
class DegenerateError : public Error { public: using Error::Error; };
class PairError : public Error { public: using Error::Error; };

// dimension and scaling
class EmptySetError : public Error { public: using Error::Error; };
class InsufficientDataError : public Error { public: using Error::Error; };

// real dynamics
class CombinatoricsError : public Error {
 public:
  CombinatoricsError(const std::string& what, int level_reached)
      : Error(what), level_reached_(level_reached) {}
  int level_reached() const noexcept { return level_reached_; }

 private:
  int level_reached_;
};

}  // namespace feigen
