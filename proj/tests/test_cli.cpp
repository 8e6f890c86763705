#include "coorbit/coorbit.hpp"
#include "coorbit/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace coorbit;
namespace cio = coorbit::io;
namespace fs = std::filesystem;
using cio::json;

namespace {

const std::string kCli = COORBIT_CLI_PATH;

// Default chart of the tool.
const SignalGrid kGrid{-8, 1.0 / 32, 512};
const AffineQuadrature kQuad(-8, 8, 512, 0.25, 4, 25, {1, -1});

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("coorbit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Runs the tool with `args`; returns its exit status.
    int run(const std::string& args) const {
        const std::string cmd = "'" + kCli + "' " + args + " 2>'" + path("stderr.txt") + "'";
        const int st = std::system(cmd.c_str());
        return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    }

    std::string stderr_text() const {
        std::ifstream in(path("stderr.txt"));
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    json read(const std::string& name) const { return cio::read_json(path(name)); }

    std::string bytes(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, KernelOfNormalizedMexicanHat) {
    ASSERT_EQ(run("cwt --out-dir " + path("")), 0) << stderr_text();
    const auto k = cio::group_field_from_json(read("cwt.json"));
    const auto psi = normalize_admissible(mexican_hat(kGrid));
    const auto lib = reproducing_kernel(psi, kQuad);
    ASSERT_EQ(k.size(), lib.size());
    for (std::size_t i = 0; i < k.size(); ++i) ASSERT_EQ(k.values[i], lib.values[i]);
    // With C_psi = 1 the value at the identity is ||psi||^2, not 1.
    const auto e = interpolate(k, AffinePoint{0, 1});
    ASSERT_TRUE(e);
    const double n2 = l2_norm(psi) * l2_norm(psi);
    EXPECT_NEAR(e->real(), n2, 1e-3 * n2);
    EXPECT_NEAR(e->imag(), 0, 1e-12);
}

TEST_F(Cli, MissingFileIsIoError) {
    EXPECT_EQ(run("cwt --signal " + path("absent.json") + " --out-dir " + path("")), 2);
    EXPECT_NE(stderr_text().find("absent.json"), std::string::npos);
    EXPECT_EQ(run("cwt --config " + path("absent.json")), 2);
    std::ofstream(path("bad.json")) << "{ nope";
    EXPECT_EQ(run("cwt --config " + path("bad.json")), 2);
}

TEST_F(Cli, SidecarNormsMatchLibrary) {
    std::mt19937_64 rng(3);
    const auto f = random_wave_packets(kGrid, rng);
    cio::write_json(path("f.json"), cio::versioned(cio::to_json(f)));
    cio::write_json(path("run.json"), {{"version", "coorbit/1"}, {"command", "cwt"}, {"signal", path("f.json")},
                                       {"m", {{"family", "m"}, {"s", 0.5}}}, {"out_dir", path("")}});
    ASSERT_EQ(run("cwt --config " + path("run.json")), 0) << stderr_text();
    const auto w = cwt(f, normalize_admissible(mexican_hat(kGrid)), kQuad);
    const auto m = WeightSpec::power_scale(0.5);
    const auto s = read("cwt.stats.json").at("lpm_norm");
    EXPECT_EQ(s.at("1").get<double>(), lpm_norm(w, 1, m));
    EXPECT_EQ(s.at("2").get<double>(), lpm_norm(w, 2, m));
    EXPECT_EQ(s.at("inf").get<double>(), lpm_norm(w, std::numeric_limits<double>::infinity(), m));
}

TEST_F(Cli, StftWritesFieldAndSidecar) {
    ASSERT_EQ(run("stft --out-dir " + path("")), 0) << stderr_text();
    const auto v = cio::tf_field_from_json(read("stft.json"));
    const auto g = gaussian(kGrid);
    const auto lib = tf_reproducing_kernel(g, {-8, 0.25, 65}, {-4, 0.125, 65});
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v.values[i], lib.values[i]);
    EXPECT_EQ(read("stft.stats.json").at("lpm_norm").at("2").get<double>(), l2_norm(lib));
}

TEST_F(Cli, ConfigurationIsChecked) {
    EXPECT_EQ(run("cwt --no_such_key 1 --out-dir " + path("")), 1);
    EXPECT_EQ(run("cwt --quadrature.bogus 1 --out-dir " + path("")), 1);
    cio::write_json(path("old.json"), {{"version", "coorbit/0"}});
    EXPECT_NE(run("cwt --config " + path("old.json")), 0);
    cio::write_json(path("untagged.json"), {{"seed", 1}});
    EXPECT_NE(run("cwt --config " + path("untagged.json")), 0);
    cio::write_json(path("other.json"), {{"version", "coorbit/1"}, {"command", "stft"}});
    EXPECT_EQ(run("cwt --config " + path("other.json")), 1);
    EXPECT_EQ(run("cwt --wavelet builtin:nothing --out-dir " + path("")), 1);
    EXPECT_FALSE(stderr_text().empty());
}

TEST_F(Cli, AdmissibilityAndMoments) {
    ASSERT_EQ(run("admissibility --out-dir " + path("")), 0);
    EXPECT_EQ(read("admissibility.json").at("constant").get<double>(), admissibility_constant(mexican_hat(kGrid)).constant);
    EXPECT_EQ(run("admissibility --wavelet builtin:gaussian --out-dir " + path("")), 3);
    EXPECT_FALSE(read("admissibility.json").at("admissible").get<bool>());
    ASSERT_EQ(run("moments --out-dir " + path("")), 0);
    EXPECT_EQ(read("moments.json").at("vanishing_moments"), 2);
}

TEST_F(Cli, CertifyMexicanHat) {
    ASSERT_EQ(run("certify-atom --U '{\"beta\":0.01,\"alpha\":1.01}' --out-dir " + path("")), 0) << stderr_text();
    const auto suff = read("sufficiency.json");
    EXPECT_TRUE(suff.at("pass").get<bool>());
    EXPECT_EQ(suff.at("vanishing_moments"), 2);
    const auto cert = read("certificate.json");
    EXPECT_TRUE(cert.at("pass").get<bool>());
    const auto lib = atom_certificate(normalize_admissible(mexican_hat(kGrid)), kQuad, WeightSpec::symmetric_power(1),
                                      AffineNeighborhood(0.01, 1.01));
    EXPECT_EQ(cert.at("q").get<double>(), lib.q);
    EXPECT_FALSE(cert.at("caveat").get<std::string>().empty());
}

TEST_F(Cli, GaussianIsNotAdmissible) {
    EXPECT_EQ(run("certify-atom --wavelet builtin:gaussian --out-dir " + path("")), 3);
    EXPECT_NE(stderr_text().find("not admissible"), std::string::npos);
}

TEST_F(Cli, EnlargedNeighbourhoodRaisesQ) {
    double prev = 0;
    for (const char* u : {"{\"beta\":0.01,\"alpha\":1.01}", "{\"beta\":0.05,\"alpha\":1.05}", "{\"beta\":0.2,\"alpha\":1.2}"}) {
        const int code = run("certify-atom --U '" + std::string(u) + "' --out-dir " + path(""));
        EXPECT_TRUE(code == 0 || code == 3);
        const double q = read("certificate.json").at("q");
        EXPECT_GE(q, prev);
        prev = q;
    }
    EXPECT_EQ(run("certify-atom --U '{\"beta\":0.2,\"alpha\":1.2}' --out-dir " + path("")), 3);
}

TEST_F(Cli, WindowCertificate) {
    const int code = run("certify-atom --mode window --out-dir " + path(""));
    EXPECT_TRUE(code == 0 || code == 3);
    EXPECT_TRUE(read("sufficiency.json").at("pass").get<bool>());
    EXPECT_EQ(read("certificate.json").at("U").at("type"), "tf");
}

TEST_F(Cli, DesignOnSmoothAtom) {
    // Moments are resolved on a wide grid; the kernel lives on the default chart.
    const std::string wide = "--sufficiency_grid '{\"t0\":-32,\"dt\":0.015625,\"n\":4096}'";
    ASSERT_EQ(run("design-lattice " + wide + " --out-dir " + path("")), 0) << stderr_text();
    const auto d = read("design.json");
    EXPECT_TRUE(d.at("certificate").at("pass").get<bool>());
    EXPECT_LT(d.at("certificate").at("q").get<double>(), 1);
    const auto lat = cio::affine_lattice_from_json(read("lattice.json"));
    const auto lib = design_lattice(reproducing_kernel(normalize_admissible(smooth_bandpass_atom(kGrid)), kQuad),
                                    WeightSpec::symmetric_power(1));
    EXPECT_EQ(lat.alpha(), lib.alpha);
    EXPECT_EQ(lat.beta(), lib.beta);
    EXPECT_EQ(lat.size(), lib.lattice.size());
    // On the chart grid alone the atom shows too few moments.
    EXPECT_EQ(run("design-lattice --out-dir " + path("")), 3);
    EXPECT_EQ(run("design-lattice " + wide + " --schedule.cap 2 --out-dir " + path("")), 3);
}

TEST_F(Cli, BoundsWithOneDrawAreEqual) {
    const std::string lat = "'{\"type\":\"tf\",\"alpha_x\":0.5,\"beta_omega\":0.5,\"k1\":[-20,20],\"k2\":[-8,8]}'";
    const std::string u = "'{\"type\":\"tf\",\"beta_x\":0.5,\"beta_omega\":0.5}'";
    ASSERT_EQ(run("frame-bounds --mode gabor --ensemble 1 --lattice " + lat + " --U " + u + " --out-dir " + path("")), 0)
        << stderr_text();
    const auto r = read("bounds.json");
    EXPECT_EQ(r.at("a_hat").get<double>(), r.at("b_hat").get<double>());
    EXPECT_EQ(r.at("ratios").size(), 1u);
    // Lattice too coarse for U.
    EXPECT_NE(run("frame-bounds --mode gabor --lattice " + lat + " --U '{\"type\":\"tf\",\"beta_x\":0.1,\"beta_omega\":0.1}' --out-dir " +
                  path("")),
              0);
}

TEST_F(Cli, ReconstructFromKernelSamples) {
    const std::string wide = "--sufficiency_grid '{\"t0\":-32,\"dt\":0.015625,\"n\":4096}'";
    ASSERT_EQ(run("design-lattice " + wide + " --out-dir " + path("")), 0) << stderr_text();
    ASSERT_EQ(run("cwt --wavelet builtin:smooth_bandpass --out-dir " + path("")), 0);
    const auto d = read("design.json");
    const json u{{"beta", d.at("beta")}, {"alpha", d.at("alpha")}};
    ASSERT_EQ(run("reconstruct --lattice " + path("lattice.json") + " --U '" + u.dump() + "' --field " + path("cwt.json") +
                  " --truth " + path("cwt.json") + " --out-dir " + path("")),
              0)
        << stderr_text();
    const auto rep = read("reconstruction.json");
    EXPECT_TRUE(rep.at("converged").get<bool>());
    EXPECT_LE(rep.at("final_relative_error").get<double>(), 1e-3);
    EXPECT_EQ(cio::group_field_from_json(read("reconstructed.json")).size(), kQuad.size());
}

TEST_F(Cli, DivergenceExitsWithHistory) {
    const std::string chart = "--grid '{\"t0\":-16,\"dt\":0.03125,\"n\":1024}' --quadrature "
                              "'{\"b_lo\":-8,\"b_hi\":8,\"n_b\":256,\"a_min\":0.25,\"a_max\":4,\"n_scales\":17,\"signs\":[1,-1]}'";
    ASSERT_EQ(run("cwt --wavelet builtin:mexican_hat " + chart + " --out-dir " + path("")), 0);
    const std::string lat = "'{\"type\":\"affine\",\"alpha\":4,\"beta\":4,\"j\":[-2,2],\"k\":[-8,8]}'";
    const std::string args = "reconstruct --wavelet builtin:mexican_hat " + chart + " --lattice " + lat +
                             " --U '{\"beta\":4,\"alpha\":4}' --field " + path("cwt.json") + " --tol 1e-12 --max_iter 200 ";
    EXPECT_EQ(run(args + "--out-dir " + path("")), 3);
    EXPECT_EQ(run(args + "--override_certificate true --out-dir " + path("")), 4);
    EXPECT_NE(stderr_text().find("residual history"), std::string::npos);
    const auto h = read("reconstruction.json").at("residual_history");
    ASSERT_GE(h.size(), 4u);
    EXPECT_GT(h[h.size() - 1].get<double>(), h[h.size() - 2].get<double>());
}

TEST_F(Cli, SameSeedSameBytes) {
    for (const char* out : {"a", "b"})
        ASSERT_EQ(run("cwt --signal builtin:wave_packets --seed 17 --out-dir " + path(out)), 0);
    EXPECT_EQ(bytes("a/cwt.json"), bytes("b/cwt.json"));
    EXPECT_EQ(bytes("a/cwt.stats.json"), bytes("b/cwt.stats.json"));
    ASSERT_EQ(run("cwt --signal builtin:wave_packets --seed 18 --out-dir " + path("c")), 0);
    EXPECT_NE(bytes("a/cwt.json"), bytes("c/cwt.json"));

    const std::string bounds = "frame-bounds --mode gabor --ensemble 3 --lattice "
                               "'{\"type\":\"tf\",\"alpha_x\":0.5,\"beta_omega\":0.5,\"k1\":[-20,20],\"k2\":[-8,8]}' "
                               "--U '{\"type\":\"tf\",\"beta_x\":0.5,\"beta_omega\":0.5}' --seed 5 --out-dir ";
    ASSERT_EQ(run(bounds + path("d")), 0);
    ASSERT_EQ(run(bounds + path("e")), 0);
    EXPECT_EQ(bytes("d/bounds.json"), bytes("e/bounds.json"));
}
