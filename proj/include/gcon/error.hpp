#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gcon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: violated preconditions, malformed documents.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
  ValidationError(const std::string& what, std::vector<std::string> details)
      : Error(what), details_(std::move(details)) {}
  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// Failure of the physics pipeline (disconnected device, non-convergent lead, ...).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

class DisconnectedDeviceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConvergenceError : public PhysicsError {
 public:
  ConvergenceError(const std::string& what, double energy, double eta)
      : PhysicsError(what), energy_(energy), eta_(eta) {}
  double energy() const { return energy_; }
  double eta() const { return eta_; }

 private:
  double energy_;
  double eta_;
};

}  // namespace gcon
