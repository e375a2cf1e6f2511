// Serial reference vs OpenMP kernels: feasibility grid and per-feature prolines.
#include "dimx/evaluation.hpp"
#include "dimx/feasibility.hpp"
#include "dimx/prolines.hpp"

#include <omp.h>

#include <chrono>
#include <iostream>

namespace {

template <class F>
double median_ms(int repeats, F&& f) {
    std::vector<double> t;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        t.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return dimx::median(std::move(t));
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    std::cout << "kernel,size,threads,serial_ms,parallel_ms,speedup,identical\n";

    for (std::size_t d : {10, 50, 200}) {
        const dimx::Dataset data = dimx::gen_gaussian(500, d, 3);
        const dimx::Model model = dimx::fit_pca(data);
        const dimx::Vector x = data.row(0);
        const dimx::PlaneBounds bounds = dimx::plane_bounds_of(dimx::project_all(model, data.values()));

        dimx::ConstraintSet constraints(d);
        constraints.lock(0, x[0]);
        constraints.set_bounds(1, data.stats()[1].min, x[1]);
        const dimx::GridResolution res{32, 32};

        dimx::FeasibilityMap serial, parallel;
        const double ts = median_ms(repeats, [&] {
            serial = dimx::compute_feasibility_map(model, x, constraints, res, bounds, dimx::Exec::serial);
        });
        const double tp = median_ms(repeats, [&] {
            parallel = dimx::compute_feasibility_map(model, x, constraints, res, bounds, dimx::Exec::parallel);
        });
        std::cout << "feasibility_map," << d << ',' << omp_get_max_threads() << ',' << ts << ',' << tp << ','
                  << ts / tp << ',' << (serial.mask == parallel.mask && serial.residuals == parallel.residuals)
                  << '\n';

        std::vector<dimx::Proline> ps, pp;
        const double ls = median_ms(repeats, [&] {
            ps = dimx::compute_prolines(model, data, 0, x, {}, dimx::Exec::serial);
        });
        const double lp = median_ms(repeats, [&] {
            pp = dimx::compute_prolines(model, data, 0, x, {}, dimx::Exec::parallel);
        });
        bool same = ps.size() == pp.size();
        for (std::size_t i = 0; same && i < ps.size(); ++i) {
            same = ps[i].samples.size() == pp[i].samples.size();
            for (std::size_t k = 0; same && k < ps[i].samples.size(); ++k)
                same = ps[i].samples[k].position == pp[i].samples[k].position;
        }
        std::cout << "prolines," << d << ',' << omp_get_max_threads() << ',' << ls << ',' << lp << ',' << ls / lp
                  << ',' << same << '\n';
    }
    return 0;
}
