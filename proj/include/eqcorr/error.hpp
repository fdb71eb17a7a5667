#ifndef EQCORR_ERROR_HPP
#define EQCORR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eqcorr
{
    /// Argument outside the mathematical domain of an operation.
    class domain_error : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    /// Invalid experiment configuration. Carries the offending field and, when
    /// parsed from text, the 1-based line number (0 when unknown).
    class config_error : public std::runtime_error
    {
    public:
        config_error(std::string field, const std::string& what, std::size_t line = 0)
            : std::runtime_error(format(field, what, line)), m_field(std::move(field)), m_line(line)
        {
        }

        const std::string& field() const noexcept { return m_field; }
        std::size_t line() const noexcept { return m_line; }

    private:
        static std::string format(const std::string& field, const std::string& what, std::size_t line)
        {
            std::string msg;
            if (line != 0)
                msg = "line " + std::to_string(line) + ": ";
            if (!field.empty())
                msg += field + ": ";
            return msg + what;
        }

        std::string m_field;
        std::size_t m_line;
    };

    /// Adaptive quadrature did not reach its tolerance within the order cap.
    class convergence_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class io_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
} // namespace eqcorr

#endif // EQCORR_ERROR_HPP
