// Compares the serial reference paths against the OpenMP kernels on a
// desk-scale market: likelihood evaluation (objective + gradient) and the
// day-process simulator. Also asserts the parallel results match the serial
// reference bit for bit.

#include <chrono>
#include <cstdio>

#include "placement/estimate.hpp"
#include "placement/generate.hpp"
#include "placement/hiring.hpp"
#include "placement/parallel.hpp"

using namespace placement;
using Clock = std::chrono::steady_clock;

namespace {
double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
} // namespace

int main(int argc, char** argv) {
    int n_students = 2000, n_jobs = 20, repeats = 5;
    if (argc > 1) n_students = std::atoi(argv[1]);
    if (argc > 2) n_jobs = std::atoi(argv[2]);
    if (argc > 3) repeats = std::atoi(argv[3]);

    MarketConfig mc;
    mc.students = n_students;
    mc.jobs = n_jobs;
    mc.days = 4;
    mc.years = 4;
    mc.seed = 42;
    auto gen = generate_market(mc, recovery_parameters(layout_for(mc)));

    EstimationConfig ec;
    ec.r_draws = 300;
    ec.seed = 7;
    LikelihoodModel model(gen.market, layout_for(mc), ec, gen.params);
    Eigen::VectorXd x = model.pack(gen.params);
    Eigen::VectorXd gs, gp;

    std::printf("market: N=%d, postings=%d, R=%d, threads=%d\n", gen.market.n_students(),
                gen.market.n_postings(), ec.r_draws, par::max_threads());

    // Likelihood evaluation: serial reference vs OpenMP.
    double fs = 0, fp = 0;
    auto t0 = Clock::now();
    for (int r = 0; r < repeats; ++r) fs = model.eval(x, &gs, par::Exec::Serial);
    const double t_serial = ms_since(t0) / repeats;
    t0 = Clock::now();
    for (int r = 0; r < repeats; ++r) fp = model.eval(x, &gp, par::Exec::Parallel);
    const double t_par = ms_since(t0) / repeats;
    std::printf("loglik+grad   serial %8.1f ms   parallel %8.1f ms   speedup %.2fx\n", t_serial,
                t_par, t_serial / t_par);
    if (fs != fp || gs != gp) {
        std::printf("MISMATCH between serial and parallel likelihood paths\n");
        return 1;
    }

    // Day-process simulation (already replication-parallel internally; time
    // one pass of each thread count).
    HiringModel::Options ho;
    ho.q_mode = HiringModel::Options::QMode::Integrate;
    ho.q_draws = 1;
    ho.seed = 11;
    HiringModel hm(gen.market, gen.params, layout_for(mc), ho);
    const int save_threads = par::max_threads();
    par::set_threads(1);
    t0 = Clock::now();
    auto s1 = hm.simulate(300, 5);
    const double t_sim1 = ms_since(t0);
    par::set_threads(save_threads);
    t0 = Clock::now();
    auto s2 = hm.simulate(300, 5);
    const double t_sim2 = ms_since(t0);
    std::printf("simulate(300) 1 thread %8.1f ms   %d threads %8.1f ms   speedup %.2fx\n", t_sim1,
                save_threads, t_sim2, t_sim1 / t_sim2);
    if (s1.total_hires != s2.total_hires || s1.unemployment_all != s2.unemployment_all) {
        std::printf("MISMATCH between thread counts in simulate\n");
        return 1;
    }
    std::printf("parallel results identical to serial reference\n");
    return 0;
}
