#ifndef ECS_METROLOGY_H
#define ECS_METROLOGY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EcsStatus {
  ECS_STATUS_OK = 0,
  ECS_STATUS_NULL_POINTER = 1,
  // Bad probe, scenario or argument.
  ECS_STATUS_INVALID_ARGUMENT = 2,
  // Truncation, eigensolver or root-finding failure.
  ECS_STATUS_NUMERICAL = 3,
  // The request is outside what the model describes (degenerate support, minus-sign SLD).
  ECS_STATUS_UNSUPPORTED = 4,
  ECS_STATUS_PANIC = 5,
} EcsStatus;

typedef enum EcsSign {
  ECS_SIGN_PLUS = 0,
  ECS_SIGN_MINUS = 1,
} EcsSign;

typedef enum EcsLossModel {
  ECS_LOSS_MODEL_BOTH_ARMS = 0,
  ECS_LOSS_MODEL_ONE_ARM_A = 1,
} EcsLossModel;

// Opaque probe state `|α⟩|β⟩ ± |β⟩|α⟩`.
typedef struct EcsProbe EcsProbe;

// Opaque loss scenario: model, loss rate and phase.
typedef struct EcsScenario EcsScenario;

typedef struct EcsEcoOptimum {
  double beta_opt;
  double eco_value;
  // Nonzero when no interior β beats the separable limit.
  uint8_t boundary;
} EcsEcoOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a probe. Release it with [`ecs_probe_free`].
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_probe_new(double alpha, double beta, enum EcsSign sign, struct EcsProbe **out);

// # Safety
// `probe` must come from [`ecs_probe_new`] and not have been freed; null is ignored.
void ecs_probe_free(struct EcsProbe *probe);

// Creates a loss scenario with `rate` in `[0, 1]`. Release it with [`ecs_scenario_free`].
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_scenario_new(enum EcsLossModel model,
                                double rate,
                                double phase,
                                struct EcsScenario **out);

// # Safety
// `scenario` must come from [`ecs_scenario_new`] and not have been freed; null is ignored.
void ecs_scenario_free(struct EcsScenario *scenario);

// Closed-form QFI of the lossy output state.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_qfi(const struct EcsProbe *probe,
                       const struct EcsScenario *scenario,
                       double *out);

// `4(1−R)α²`, the QFI of `|α⟩|α⟩` under loss in both arms.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_separable_qfi(double alpha, const struct EcsScenario *scenario, double *out);

// Fock-space QFI; `cutoff == 0` picks the cutoff from the probe amplitudes.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_oracle_qfi(const struct EcsProbe *probe,
                              const struct EcsScenario *scenario,
                              size_t cutoff,
                              double *out);

// Negativity of the lossy output state (plus sign).
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_negativity(const struct EcsProbe *probe,
                              const struct EcsScenario *scenario,
                              double *out);

// Degree of entanglement of the input probe, in bits.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_degree_of_entanglement(const struct EcsProbe *probe, double *out);

// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_mean_photon_a(const struct EcsProbe *probe, double *out);

// QFI per input photon in mode `a`.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_eco_ratio(const struct EcsProbe *probe,
                             const struct EcsScenario *scenario,
                             double *out);

// Plus-sign `β` maximizing the QFI per input photon at fixed `α`.
//
// # Safety
// Every pointer argument must be null or valid for the duration of the call.
enum EcsStatus ecs_optimize_beta(double alpha,
                                 const struct EcsScenario *scenario,
                                 size_t grid_points,
                                 struct EcsEcoOptimum *out);

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *ecs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ecs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECS_METROLOGY_H */
