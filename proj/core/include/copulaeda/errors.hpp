#pragma once

#include <stdexcept>
#include <string>

namespace copulaeda {

//! A copula or margin parameter lies outside its family's domain.
class ParameterDomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! Kendall's tau cannot be represented by the requested family
//! (e.g. negative tau for Clayton or Gumbel).
class UnsupportedTauError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! Invalid algorithm or experiment configuration.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! The objective function returned a non-finite value.
class ObjectiveError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace copulaeda
