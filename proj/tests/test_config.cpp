#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qfb/scenarios.hpp"

using namespace qfb;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::InvalidArgument;
}

std::string message_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("qfb_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST(Parse, CommentsListsAndTypes)
{
    const auto c = ConfigFile::parse("# header\n"
                                     "a.b = 1.5   # trailing\n"
                                     "\n"
                                     "list = 1, 2 ,3\n"
                                     "flag = true\n"
                                     "n = 42\n"
                                     "word = hello world\n");
    EXPECT_DOUBLE_EQ(c.number("a.b"), 1.5);
    EXPECT_EQ(c.numbers("list"), (std::vector<double>{1, 2, 3}));
    EXPECT_TRUE(c.boolean("flag"));
    EXPECT_EQ(c.integer("n"), 42u);
    EXPECT_EQ(c.text("word"), "hello world");
    EXPECT_EQ(c.number_or("missing", 7), 7);
    EXPECT_EQ((c.vec<3>("list")), (std::array<double, 3>{1, 2, 3}));
}

TEST(Parse, SyntaxErrors)
{
    EXPECT_EQ(code_of([] { ConfigFile::parse("just words\n"); }), Errc::ParseError);
    EXPECT_EQ(code_of([] { ConfigFile::parse("Bad.Key = 1\n"); }), Errc::ParseError);
    EXPECT_EQ(code_of([] { ConfigFile::parse("a = \n"); }), Errc::ParseError);
    EXPECT_EQ(code_of([] { ConfigFile::parse("a = 1\na = 2\n"); }), Errc::ParseError);
    const auto msg = message_of([] { ConfigFile::parse("a = 1\n\nb..c = 2\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("b..c"), std::string::npos) << msg;
}

TEST(Parse, TypedGetterErrors)
{
    const auto c = ConfigFile::parse("x = 1.5q\nn = -3\nb = maybe\nv = 1,2\nl = 1,,2\n");
    EXPECT_EQ(code_of([&] { c.number("x"); }), Errc::ParseError);
    EXPECT_EQ(code_of([&] { c.integer("n"); }), Errc::ParseError);
    EXPECT_EQ(code_of([&] { c.boolean("b"); }), Errc::ParseError);
    EXPECT_EQ(code_of([&] { c.vec<3>("v"); }), Errc::ParseError);
    EXPECT_EQ(code_of([&] { c.words("l"); }), Errc::ParseError);
    EXPECT_EQ(code_of([&] { c.number("absent"); }), Errc::ValidationError);
    EXPECT_NE(message_of([&] { c.number("x"); }).find("line 1"), std::string::npos);
}

TEST(Parse, CanonicalIsOrderIndependent)
{
    const auto a = ConfigFile::parse("b = 2\na = 1\n");
    const auto b = ConfigFile::parse("# c\na = 1\n\nb =   2\n");
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_EQ(fnv1a(a.canonical()), fnv1a(b.canonical()));
    EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Scenarios, ListIsComplete)
{
    std::set<std::string> names;
    for (const auto& s : list_scenarios()) {
        names.insert(s.name);
        EXPECT_FALSE(s.description.empty());
        EXPECT_FALSE(s.required.empty());
    }
    for (const char* n : {"ald-causality", "ald-runaway", "uniform-acceleration-unruh", "fdr-check",
                          "detector-response", "mirror-static", "mirror-moving"})
        EXPECT_TRUE(names.count(n)) << n;
}

TEST(Validate, UnknownKeyAndScenario)
{
    auto msg = message_of([] {
        parse_config(ConfigFile::parse("scenario = mirror-moving\nmirror.motion = rest\nmirror.colour = red\n"));
    });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("mirror.colour"), std::string::npos) << msg;
    EXPECT_EQ(code_of([] { parse_config(ConfigFile::parse("scenario = warp-drive\n")); }), Errc::ParseError);
    // a key that exists for another scenario is still rejected
    EXPECT_EQ(code_of([] {
                  parse_config(ConfigFile::parse("scenario = mirror-moving\nmirror.motion = rest\nnoise.n = 4\n"));
              }),
              Errc::ParseError);
}

TEST(Validate, RunawayFreeBound)
{
    const std::string text = "scenario = ald-runaway\n"
                             "particle.m0 = 0.01\nparticle.e = 1\nparticle.cutoff = 10\nparticle.kappa = 1\n";
    try {
        parse_config(ConfigFile::parse(text));
        FAIL();
    } catch (const Error& e) {
        EXPECT_TRUE(e.is_validation());
    }
}

TEST(Validate, ConstraintViolations)
{
    const std::string base = "scenario = fdr-check\ntrajectory.kind = hyperbolic\nfield.state = vacuum\n";
    EXPECT_EQ(code_of([&] { parse_config(ConfigFile::parse(base + "trajectory.accel = -1\nfdr.omegas = 1\n")); }),
              Errc::ValidationError);
    EXPECT_EQ(code_of([&] { parse_config(ConfigFile::parse(base + "trajectory.accel = 1\nfdr.omegas = 1,-2\n")); }),
              Errc::ValidationError);
    EXPECT_EQ(code_of([&] { parse_config(ConfigFile::parse(base + "trajectory.accel = 1\n")); }),
              Errc::ValidationError);
    EXPECT_EQ(code_of([&] {
                  parse_config(ConfigFile::parse(base + "trajectory.accel = 1\nfdr.omegas = 1\nfield.dim = 2\n"));
              }),
              Errc::ValidationError);
    EXPECT_EQ(code_of([&] {
                  parse_config(ConfigFile::parse(base + "trajectory.accel = 1\nfdr.omegas = 1\nfield.eps = 0\n"));
              }),
              Errc::ValidationError);
    EXPECT_NO_THROW(parse_config(ConfigFile::parse(base + "trajectory.accel = 1\nfdr.omegas = 1, 2\n")));
}

TEST(Run, MirrorMovingWritesFilesAndManifest)
{
    const auto dir = scratch("moving");
    auto cfg = parse_config(ConfigFile::parse("scenario = mirror-moving\nmirror.motion = exponential_map\n"
                                              "mirror.kappa = 2\nmirror.u_n = 5\n"));
    cfg.out = dir;
    const auto m = run_scenario(cfg);
    ASSERT_EQ(m.files.size(), 2u);
    EXPECT_EQ(m.files[0].name, "raymap.csv");
    EXPECT_EQ(m.files[1].name, "summary.csv");
    for (const auto& f : m.files) EXPECT_EQ(hex64(fnv1a(slurp(dir / f.name))), f.fnv1a);
    // exponential map radiates a constant flux kappa^2 / 48 pi
    EXPECT_NEAR(m.summary.at("max_abs_flux"), 4 / (48 * std::numbers::pi), 1e-12);
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(j["scenario"], "mirror-moving");
    EXPECT_EQ(j["config_hash"], m.config_hash);
    EXPECT_EQ(j["version"], kVersion);
    EXPECT_EQ(j["files"].size(), 2u);
    fs::remove_all(dir);
}

TEST(Run, HyperbolicMirrorRejectsEarlyRays)
{
    EXPECT_EQ(code_of([] {
                  parse_config(ConfigFile::parse(
                      "scenario = mirror-moving\nmirror.motion = hyperbolic\nmirror.accel_length = 1\n"
                      "mirror.u_min = -2\n"));
              }),
              Errc::ValidationError);
}

TEST(Run, RepeatRunsAreByteIdentical)
{
    const std::string text = "scenario = fdr-check\ntrajectory.kind = static\nfield.state = thermal\n"
                             "field.temperature = 0.5\nfdr.omegas = 0.5, 1\nfdr.t_obs = 200\n";
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
        const auto dir = scratch("repeat" + std::to_string(rep));
        auto cfg = parse_config(ConfigFile::parse(text));
        cfg.out = dir;
        run_scenario(cfg);
        const auto body = slurp(dir / "fdr.csv") + slurp(dir / "manifest.json");
        if (rep == 0) first = body;
        else EXPECT_EQ(body, first);
        fs::remove_all(dir);
    }
}

TEST(Validate, MinimalUnruhConfigFillsDefaults)
{
    const auto cfg = parse_config(ConfigFile::parse("scenario = uniform-acceleration-unruh\n"
                                                    "particle.m0 = 1\nparticle.e = 0.5\nparticle.cutoff = 1\n"
                                                    "potential.force = 1, 0, 0\npotential.k = 0.25\n"
                                                    "potential.axes = y\n"));
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.out, fs::path("out"));
    const auto ald = read_ald(cfg.raw, true);
    EXPECT_EQ(ald.params.kappa, 1.0);
    EXPECT_EQ(ald.potential.kind, PotentialKind::combined);
    EXPECT_DOUBLE_EQ(ald.sw.tau_d, ald.params.default_tau_d());
    EXPECT_EQ(ald.dt, 1e-3);
    const auto ns = read_noise(cfg.raw, "d2");
    EXPECT_EQ(ns.grid.n, 512u);
    EXPECT_EQ(ns.weight, 0.5);
}

TEST(Validate, UnknownParticleKey)
{
    EXPECT_EQ(code_of([] {
                  parse_config(ConfigFile::parse("scenario = ald-runaway\nparticle.m0 = 1\nparticle.e = 0.3\n"
                                                 "particle.cutoff = 1\nparticle.charge_sign = -1\n"));
              }),
              Errc::ParseError);
}

TEST(Validate, ShippedConfigsParse)
{
    std::set<std::string> covered;
    for (const auto& f : fs::directory_iterator(fs::path(QFB_SOURCE_DIR) / "configs")) {
        if (f.path().extension() != ".cfg") continue;
        SCOPED_TRACE(f.path().string());
        EXPECT_NO_THROW(covered.insert(parse_config(f.path()).scenario));
    }
    for (const auto& s : list_scenarios()) EXPECT_TRUE(covered.count(s.name)) << s.name;
}
