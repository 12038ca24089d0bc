#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../moments.hpp"

namespace rmtau::cli {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(v));
    return b;
}

// content-addressed moment tables on disk
class MomentStore {
public:
    using Compute = std::function<SkewPair(const EnsembleSpec&, int)>;
    using Warn = std::function<void(const std::string&)>;

    explicit MomentStore(std::filesystem::path dir, Compute compute = default_moments(), Warn warn = nullptr)
        : dir_(std::move(dir)), compute_(std::move(compute)), warn_(std::move(warn))
    {
        std::filesystem::create_directories(dir_);
    }

    // every input that changes the table: kind, L, alpha, beta, s, M and the quadrature resolution
    static std::string key_text(const EnsembleSpec& e, int M)
    {
        return spec_digest(e, false) + ";M=" + std::to_string(M) + ";res=" + moment_resolution(e).digest();
    }
    std::filesystem::path path_for(const EnsembleSpec& e, int M) const
    {
        return dir_ / ("moments-" + hex64(fnv1a(key_text(e, M))) + ".txt");
    }

    SkewPair get(const EnsembleSpec& e, int M)
    {
        auto path = path_for(e, M);
        std::string key = key_text(e, M);
        if (std::filesystem::exists(path)) {
            std::string why;
            if (auto p = load(path, key, M, why)) {
                ++hits_;
                return *p;
            }
            if (warn_) warn_("moment cache entry " + path.string() + " rejected (" + why + "); recomputing");
            ++corrupt_;
        }
        ++misses_;
        SkewPair p = compute_(e, M);
        store(path, key, p);
        return p;
    }

    MomentProvider provider()
    {
        return [this](const EnsembleSpec& e, int M) { return get(e, M); };
    }

    int hits() const { return hits_; }
    int misses() const { return misses_; }
    int corrupt() const { return corrupt_; }

private:
    static std::string body(const SkewPair& p)
    {
        std::ostringstream os;
        char buf[80];
        for (int i = 0; i < p.size(); ++i)
            for (int j = 0; j < p.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.A(i, j).real(), p.A(i, j).imag());
                os << buf;
            }
        for (int i = 0; i < p.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.a(i).real(), p.a(i).imag());
            os << buf;
        }
        return os.str();
    }

    void store(const std::filesystem::path& path, const std::string& key, const SkewPair& p) const
    {
        std::string data = body(p);
        std::ostringstream head;
        head << "rmtau-moments 1\nkey " << key << "\nsize " << p.size() << "\nbase " << p.base << "\nchecksum "
             << hex64(fnv1a(data)) << "\n";
        auto lockp = dir_ / ".lock";
        int fd = ::open(lockp.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd >= 0) ::flock(fd, LOCK_EX);
        auto tmp = path;
        tmp += ".tmp" + std::to_string(::getpid());
        {
            std::ofstream f(tmp, std::ios::binary);
            f << head.str() << data;
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) std::filesystem::remove(tmp, ec);
        if (fd >= 0) {
            ::flock(fd, LOCK_UN);
            ::close(fd);
        }
    }

    static std::optional<SkewPair> load(const std::filesystem::path& path, const std::string& key, int M, std::string& why)
    {
        std::ifstream f(path, std::ios::binary);
        std::string magic, line, kkey, ksize, kbase, kcheck;
        std::getline(f, magic);
        if (magic != "rmtau-moments 1") return why = "bad header", std::nullopt;
        std::getline(f, line);
        if (line != "key " + key) return why = "key mismatch", std::nullopt;
        int size = -1, base = 0;
        std::string check;
        f >> ksize >> size >> kbase >> base >> kcheck >> check;
        f.get();
        if (!f || ksize != "size" || kbase != "base" || kcheck != "checksum" || size != M)
            return why = "bad header", std::nullopt;
        std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        if (hex64(fnv1a(data)) != check) return why = "checksum mismatch", std::nullopt;
        SkewPair p;
        p.base = base;
        p.A = CMatrix::Zero(size, size);
        p.a = CVector::Zero(size);
        p.provenance = key;
        std::istringstream is(data);
        double re, im;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) {
                if (!(is >> re >> im)) return why = "short table", std::nullopt;
                p.A(i, j) = cplx(re, im);
            }
        for (int i = 0; i < size; ++i) {
            if (!(is >> re >> im)) return why = "short table", std::nullopt;
            p.a(i) = cplx(re, im);
        }
        return p;
    }

    std::filesystem::path dir_;
    Compute compute_;
    Warn warn_;
    int hits_ = 0, misses_ = 0, corrupt_ = 0;
};

} // namespace rmtau::cli
