#pragma once

#include <stdexcept>
#include <string>

namespace liqode {

class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// wrong parameter regime for the requested operation (a+b sign trichotomy)
class regime_error : public error {
public:
    using error::error;
};

class argument_error : public error {
public:
    using error::error;
};

// evaluation point outside the valid domain of a trace or formula
class domain_error : public error {
public:
    using error::error;
};

// requested accuracy not reachable at the given point
class precision_error : public error {
public:
    using error::error;
};

// shooting failed to bracket the target
class bracket_error : public error {
public:
    using error::error;
};

// integration stopped by step-size underflow; carries the last valid x
class blow_up_error : public error {
public:
    blow_up_error(const std::string& what, double last_x)
        : error(what), last_x(last_x) {}
    double last_x;
};

class numeric_error : public error {
public:
    using error::error;
};

// eps-continuation did not produce a Cauchy sequence of traces
class convergence_error : public error {
public:
    using error::error;
};

// grid does not reach far enough for the requested estimate
class coverage_error : public error {
public:
    using error::error;
};

class insufficient_separation_error : public error {
public:
    using error::error;
};

// two mathematically equal formulas disagreed beyond tolerance
class consistency_error : public error {
public:
    using error::error;
};

// no uniform-sign prefix: the candidate envelope fails everywhere
class envelope_error : public error {
public:
    using error::error;
};

} // namespace liqode
