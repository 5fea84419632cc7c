/* Generated by cbindgen from src/lib.rs. Do not edit. */

#ifndef RESOLVENT_LAB_H
#define RESOLVENT_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RL_OK 0

#define RL_NULL_POINTER 1

#define RL_INVALID_PARAMETER 2

#define RL_OUTSIDE_REGION 3

#define RL_DEGENERATE_CASE 4

#define RL_BRANCH 5

#define RL_NEAR_SINGULAR 6

#define RL_SINGULAR_SYSTEM 7

#define RL_SHAPE_MISMATCH 8

#define RL_SEARCH_FAILED 9

#define RL_QUADRATURE 10

#define RL_DIVERGENCE 11

#define RL_OUT_OF_DOMAIN 12

#define RL_CONFIG 13

#define RL_IO 14

#define RL_BUFFER_TOO_SMALL 15

#define RL_INVALID_UTF8 16

#define RL_PANIC 99

// Model parameters and admissible region.
typedef struct RlModel RlModel;

// Solution of one resolvent problem, in physical space.
typedef struct RlSolution RlSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t rl_last_error(char *buf, size_t len);

// Baseline model: μ = ν = σ = m = γ₁ = γ₃ = 1, ζ = 0, ε = π/4, λ0 = 1.
//
// # Safety
// `out` must be a valid pointer.
int32_t rl_model_baseline(struct RlModel **out);

// Model from TOML text with `[fluid]` and `[sector]` blocks, as in a run config.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
int32_t rl_model_from_toml(const char *toml, struct RlModel **out);

// # Safety
// `model` must come from `rl_model_*` and not be used afterwards.
void rl_model_free(struct RlModel *model);

// Writes 1 to `inside` when λ lies in the model's admissible region, else 0.
//
// # Safety
// `model` must be a live handle and `inside` a valid pointer.
int32_t rl_model_contains(const struct RlModel *model, double re, double im, int32_t *inside);

// Randomized lower-bound scan of |N(A,B)|.
//
// # Safety
// `model` must be a live handle; output pointers must be valid.
int32_t rl_scan_nab(const struct RlModel *model,
                    size_t samples,
                    uint64_t seed,
                    double *lambda0,
                    double *c,
                    size_t *violations);

// Solves the full resolvent problem on a 2-D grid with `nt` tangential
// points on [−half_length, half_length) and `nn` normal nodes.
//
// Data are physical values; a null pointer means zero data. Lengths in
// complex entries: d nt·nn, f nt·nn·2, g nt·2, k nt.
//
// # Safety
// Non-null data pointers must hold the stated number of (re, im) pairs;
// `out` must be a valid pointer.
int32_t rl_solve(const struct RlModel *model,
                 double lambda_re,
                 double lambda_im,
                 size_t nt,
                 double half_length,
                 size_t nn,
                 const double *d,
                 const double *f,
                 const double *g,
                 const double *k,
                 struct RlSolution **out);

// # Safety
// `sol` must come from `rl_solve` and not be used afterwards.
void rl_solution_free(struct RlSolution *sol);

// Grid sizes and the largest relative residual over all equations.
//
// # Safety
// `sol` must be a live handle; output pointers must be valid.
int32_t rl_solution_info(const struct RlSolution *sol,
                         size_t *nt,
                         size_t *nn,
                         double *max_residual);

// Normal collocation nodes (`nn` doubles).
//
// # Safety
// `out` must hold `len` doubles.
int32_t rl_solution_nodes(const struct RlSolution *sol, double *out, size_t len);

// Velocity, nt·nn·2 complex entries; `len` counts doubles.
//
// # Safety
// `out` must hold `len` doubles.
int32_t rl_solution_velocity(const struct RlSolution *sol, double *out, size_t len);

// Density, nt·nn complex entries; `len` counts doubles.
//
// # Safety
// `out` must hold `len` doubles.
int32_t rl_solution_density(const struct RlSolution *sol, double *out, size_t len);

// Surface height, nt complex entries; `len` counts doubles.
//
// # Safety
// `out` must hold `len` doubles.
int32_t rl_solution_height(const struct RlSolution *sol, double *out, size_t len);

// Runs a batch command as the command-line tool would and stores its exit
// status (0, 2, 3 or 4) in `exit_code`. `out_dir` may be null.
//
// # Safety
// Strings must be NUL-terminated; `exit_code` must be valid.
int32_t rl_run_command(const char *command,
                       const char *config_path,
                       const char *out_dir,
                       int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESOLVENT_LAB_H */
