#include "splitopt/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "splitopt/flops_model.hpp"
#include "splitopt/number_format.hpp"

namespace splitopt {

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kBudget:
      return "budget";
    case SweepAxis::kSnr:
      return "snr";
    default:
      return "layers";
  }
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "budget") return SweepAxis::kBudget;
  if (s == "snr") return SweepAxis::kSnr;
  if (s == "layers") return SweepAxis::kLayers;
  throw std::invalid_argument("unknown sweep axis '" + s +
                              "' (expected budget, snr or layers)");
}

void SweepSpec::validate() const {
  if (points.empty()) {
    throw std::invalid_argument("sweep needs at least one point");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] > points[i - 1])) {
      throw std::invalid_argument("sweep points must be strictly increasing");
    }
  }
  if (axis != SweepAxis::kBudget && !(fixed_budget > 0.0)) {
    throw std::invalid_argument("sweep needs a positive fixed budget");
  }
}

namespace {

SweepPointOutcome run_point(const SweepSpec& spec, double point,
                            const ParameterSpace& space,
                            const ArchPolicy& policy,
                            const EvaluatorStack& base,
                            const GaParams& params) {
  EvaluatorStack stack = base;
  stack.budget = spec.axis == SweepAxis::kBudget ? point : spec.fixed_budget;
  stack.snr_db = spec.axis == SweepAxis::kSnr ? point : spec.fixed_snr;

  const ParameterSpace* run_space = &space;
  ParameterSpace restricted = space;
  if (spec.axis == SweepAxis::kLayers) {
    const int split = static_cast<int>(std::llround(point));
    if (static_cast<double>(split) != point ||
        !std::binary_search(space.splits().begin(), space.splits().end(),
                            split)) {
      throw std::invalid_argument("layer sweep point " + format_double(point) +
                                  " is not a member of the splits axis");
    }
    restricted = space.with_splits({split});
    run_space = &restricted;
  }

  SweepPointOutcome outcome;
  outcome.axis_value = point;
  try {
    outcome.result = optimize(*run_space, policy, stack, params);
    outcome.feasible = true;
  } catch (const NoFeasibleConfiguration&) {
    outcome.feasible = false;
  }
  return outcome;
}

}  // namespace

SweepReport run_sweep(const SweepSpec& spec, const ParameterSpace& space,
                      const ArchPolicy& policy, const EvaluatorStack& base,
                      const GaParams& params, int jobs) {
  spec.validate();
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  SweepReport report;
  report.spec = spec;
  report.points.resize(spec.points.size());

  if (jobs == 1 || spec.points.size() == 1) {
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
      report.points[i] =
          run_point(spec, spec.points[i], space, policy, base, params);
    }
    return report;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.points.size()) return;
      try {
        report.points[i] =
            run_point(spec, spec.points[i], space, policy, base, params);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(jobs),
                            spec.points.size());
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) {
    threads.emplace_back(worker);
  }
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return report;
}

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  out << "axis_value,f,k,l_s,m,flops,accuracy\n";
  for (const SweepPointOutcome& point : report.points) {
    out << format_double(point.axis_value) << ',';
    if (point.feasible) {
      const Configuration& c = point.result.best;
      out << c.filters << ',' << c.kernel << ',' << c.latent_dim << ','
          << c.split << ',' << format_double(point.result.flops) << ','
          << format_double(point.result.predicted_accuracy);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void write_layers_flops_csv(const ParameterSpace& space,
                            const ArchPolicy& policy, int filters, int kernel,
                            int latent_dim, std::ostream& out) {
  out << "m,flops\n";
  for (const int split : space.splits()) {
    const Configuration c{filters, kernel, latent_dim, split};
    out << split << ',' << device_flops(c, policy).total << '\n';
  }
}

}  // namespace splitopt
