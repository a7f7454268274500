#pragma once

#include <stdexcept>
#include <string>

namespace ramlab {

// All library failures derive from this; `code()` is a stable machine-readable tag.
class RamlabError : public std::runtime_error {
public:
    RamlabError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct NonEisenstein : RamlabError {
    explicit NonEisenstein(const std::string& w) : RamlabError("NonEisenstein", w) {}
};
struct ReducibleUnramifiedStep : RamlabError {
    explicit ReducibleUnramifiedStep(const std::string& w)
        : RamlabError("ReducibleUnramifiedStep", w) {}
};
struct PrecisionTooSmall : RamlabError {
    explicit PrecisionTooSmall(const std::string& w) : RamlabError("PrecisionTooSmall", w) {}
};
struct NotInvertibleAtPrecision : RamlabError {
    explicit NotInvertibleAtPrecision(const std::string& w)
        : RamlabError("NotInvertibleAtPrecision", w) {}
};
struct NegativeValuation : RamlabError {
    explicit NegativeValuation(const std::string& w) : RamlabError("NegativeValuation", w) {}
};
struct MissingWeight : RamlabError {
    explicit MissingWeight(const std::string& w) : RamlabError("MissingWeight", w) {}
};
struct TruncationOverflow : RamlabError {
    explicit TruncationOverflow(const std::string& w) : RamlabError("TruncationOverflow", w) {}
};
struct ZeroPolynomial : RamlabError {
    explicit ZeroPolynomial(const std::string& w) : RamlabError("ZeroPolynomial", w) {}
};
struct InseparableResidual : RamlabError {
    explicit InseparableResidual(const std::string& w)
        : RamlabError("InseparableResidual", w) {}
};
struct DoesNotSplit : RamlabError {
    explicit DoesNotSplit(const std::string& w) : RamlabError("DoesNotSplit", w) {}
};
struct NotGalois : RamlabError {
    explicit NotGalois(const std::string& w) : RamlabError("NotGalois", w) {}
};
struct NotTotallyRamified : RamlabError {
    explicit NotTotallyRamified(const std::string& w)
        : RamlabError("NotTotallyRamified", w) {}
};
struct DegreeTooLarge : RamlabError {
    explicit DegreeTooLarge(const std::string& w) : RamlabError("DegreeTooLarge", w) {}
};
struct UnsupportedRelationShape : RamlabError {
    explicit UnsupportedRelationShape(const std::string& w)
        : RamlabError("UnsupportedRelationShape", w) {}
};
struct JacobianSingular : RamlabError {
    explicit JacobianSingular(const std::string& w) : RamlabError("JacobianSingular", w) {}
};
struct NotConverged : RamlabError {
    explicit NotConverged(const std::string& w) : RamlabError("NotConverged", w) {}
};
struct NotAdmissible : RamlabError {
    explicit NotAdmissible(const std::string& w) : RamlabError("NotAdmissible", w) {}
};
struct InconsistentDims : RamlabError {
    explicit InconsistentDims(const std::string& w) : RamlabError("InconsistentDims", w) {}
};
struct BasisReductionFailure : RamlabError {
    explicit BasisReductionFailure(const std::string& w)
        : RamlabError("BasisReductionFailure", w) {}
};
struct NoThresholdInRange : RamlabError {
    explicit NoThresholdInRange(const std::string& w)
        : RamlabError("NoThresholdInRange", w) {}
};
struct ParameterOutOfRange : RamlabError {
    explicit ParameterOutOfRange(const std::string& w)
        : RamlabError("ParameterOutOfRange", w) {}
};
struct UnknownLemma : RamlabError {
    explicit UnknownLemma(const std::string& w) : RamlabError("UnknownLemma", w) {}
};
struct ParseError : RamlabError {
    explicit ParseError(const std::string& w) : RamlabError("ParseError", w) {}
};

}  // namespace ramlab
