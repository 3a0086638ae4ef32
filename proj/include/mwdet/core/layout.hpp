#pragma once

#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace mwdet {

// One tensor factor of a composite Hilbert space. Fock factors are flagged so
// convergence checks know which dimensions are truncation cutoffs that may be
// enlarged.
struct Subsystem {
  int dim = 0;
  bool fock = false;
  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  SubsystemLayout(std::initializer_list<Subsystem> parts)
      : parts_(parts) {
    validate();
  }
  explicit SubsystemLayout(std::vector<Subsystem> parts) : parts_(std::move(parts)) { validate(); }

  static SubsystemLayout qubit() { return SubsystemLayout({Subsystem{2, false}}); }
  static SubsystemLayout fock(int cutoff) { return SubsystemLayout({Subsystem{cutoff, true}}); }
  static SubsystemLayout level(int dim) { return SubsystemLayout({Subsystem{dim, false}}); }

  int subsystems() const { return static_cast<int>(parts_.size()); }
  const Subsystem& at(int i) const { return parts_.at(static_cast<std::size_t>(i)); }
  const std::vector<Subsystem>& parts() const { return parts_; }

  int total_dim() const {
    int d = 1;
    for (const auto& p : parts_) d *= p.dim;
    return d;
  }

  SubsystemLayout concat(const SubsystemLayout& other) const {
    std::vector<Subsystem> all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return SubsystemLayout(std::move(all));
  }

  friend bool operator==(const SubsystemLayout&, const SubsystemLayout&) = default;

 private:
  void validate() const {
    if (parts_.empty()) throw std::invalid_argument("layout needs at least one subsystem");
    for (const auto& p : parts_)
      if (p.dim < 2) throw std::invalid_argument("subsystem dimension must be >= 2");
  }

  std::vector<Subsystem> parts_;
};

}  // namespace mwdet
