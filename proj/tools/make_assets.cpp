// Regenerates the synthetic map assets under data/maps from the analytic surfaces.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "hevlab/powertrain/engine_map.hpp"
#include "hevlab/powertrain/machine.hpp"

namespace {

void write_grid(const std::string& path, const hevlab::Grid2D& g, const char* value_name)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "# synthetic asset, regenerate with make_assets\n";
    out << "omega_radps,torque_nm," << value_name << "\n";
    char buf[128];
    for (std::size_t i = 0; i < g.xs().size(); ++i) {
        for (std::size_t j = 0; j < g.ys().size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.xs()[i], g.ys()[j], g.node(i, j));
            out << buf;
        }
    }
}

} // namespace

int main(int argc, char** argv)
{
    const std::string dir = argc > 1 ? argv[1] : hevlab::data_path("maps");
    using namespace hevlab::powertrain;
    write_grid(dir + "/engine_bsfc.csv", synthesize_bsfc_grid(), "bsfc_g_per_kwh");
    write_grid(dir + "/mg1_eff.csv", synthesize_machine_grid(115.0, hevlab::units::rpm_to_radps(9000.0)), "efficiency");
    write_grid(dir + "/mg2_eff.csv", synthesize_machine_grid(150.0, hevlab::units::rpm_to_radps(6000.0)), "efficiency");
    std::ofstream bat(dir + "/battery.csv");
    bat << "# affine open-circuit voltage, flat resistance\n";
    bat << "soc,u_oc_v,r_ohm\n";
    for (int i = 0; i <= 10; ++i) {
        const double soc = i / 10.0;
        bat << soc << "," << 325.0 + 60.0 * soc << ",0.1\n";
    }
    std::cout << "wrote assets to " << dir << "\n";
    return 0;
}
