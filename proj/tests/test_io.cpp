#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kbwave/io.hpp"
#include "kbwave/presets.hpp"

using namespace kbwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("kbwave_io_" + std::to_string(std::random_device{}())))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST(Format, SeventeenDigits)
{
    EXPECT_EQ(format17(0.1), "0.10000000000000001");
    EXPECT_EQ(format17(-1.0), "-1");
    EXPECT_EQ(format17(-0.0), "0");
    EXPECT_EQ(std::stod(format17(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(ProfileCsv, HeaderAndRows)
{
    const auto s = find_preset("fig-case1a").build();
    const std::string csv = profile_csv(sample_profile(s, {-1, 1}, 3));
    EXPECT_EQ(csv.substr(0, 15), "xi,f,f_prime,g\n");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(csv.back(), '\n');
    std::istringstream is(csv);
    std::string line;
    int rows = -1;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    }
    EXPECT_EQ(rows, 3);
    EXPECT_NE(csv.find("\n0,-1,0,-0.5\n"), std::string::npos);
}

TEST(AtomicWrite, CreatesAndReplaces)
{
    TempDir d;
    const fs::path t = d.path / "sub" / "out.csv";
    atomic_write(t, "one\n");
    EXPECT_EQ(slurp(t), "one\n");
    atomic_write(t, "two\n");
    EXPECT_EQ(slurp(t), "two\n");
    int entries = 0;
    for (const auto& e : fs::directory_iterator(t.parent_path())) {
        (void)e;
        ++entries;
    }
    EXPECT_EQ(entries, 1); // no temp file left behind
}

TEST(AtomicWrite, FailureLeavesTargetIntact)
{
    TempDir d;
    const fs::path t = d.path / "keep.txt";
    atomic_write(t, "keep\n");
    // renaming a file over a non-empty directory fails
    const fs::path dir = d.path / "blocker";
    fs::create_directories(dir / "x");
    EXPECT_THROW(atomic_write(dir, "data"), Error);
    EXPECT_EQ(slurp(t), "keep\n");
    for (const auto& e : fs::directory_iterator(d.path))
        EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
}

TEST(SolutionJson, SchemaFields)
{
    const auto s = find_preset("fig-case2bc-k1").build();
    const auto j = solution_json(s);
    EXPECT_EQ(j["kind"], "Case2Dn");
    EXPECT_TRUE(j.contains("modulus"));
    EXPECT_TRUE(j.contains("notes"));
    EXPECT_TRUE(j["coefficients"].contains("a"));
    EXPECT_FALSE(j["coefficients"].contains("c1"));
    EXPECT_NEAR(j["params"]["c"].get<double>(), -4.5, 1e-12);
}
