/* C ABI implemented by real-model adapters (DRCT, CLIP-style encoders,
 * MOLMO-class VLMs, CNN classifiers). An adapter is a shared library at
 *
 *     <model_dir>/<kind>/plugin.so      kind in {classifier, embedder,
 *                                                 super_resolver, vlm}
 *
 * exporting `veritas_plugin_entry`. `open` receives <model_dir>/<kind> so the
 * adapter can find its weights next to itself. Capabilities an adapter does
 * not provide are left as null function pointers.
 *
 * Images are passed as H x W x C row-major interleaved doubles in [0,1].
 * Every call returns one of the VERITAS_STATUS_* codes. */
#ifndef VERITAS_PLUGIN_ABI_H
#define VERITAS_PLUGIN_ABI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define VERITAS_PLUGIN_ABI_VERSION 1

enum {
  VERITAS_STATUS_OK = 0,
  VERITAS_STATUS_UNAVAILABLE = 1,
  VERITAS_STATUS_TIMEOUT = 2,
  VERITAS_STATUS_UNSUPPORTED = 3,
  VERITAS_STATUS_SHAPE = 4,
  VERITAS_STATUS_BUFFER_TOO_SMALL = 5
};

typedef struct veritas_image_view {
  size_t height;
  size_t width;
  size_t channels;
  const double* data;
} veritas_image_view;

typedef struct veritas_plugin_v1 {
  int abi_version;
  const char* name;
  int deterministic;

  void* (*open)(const char* model_path);
  void (*close)(void* handle);

  /* classifier */
  int (*input_shape)(void* handle, size_t* height, size_t* width, size_t* channels);
  int (*classify)(void* handle, const veritas_image_view* img, double logits[2]);
  /* label: 0 = real, 1 = fake; grad has H*W*C entries */
  int (*input_gradient)(void* handle, const veritas_image_view* img, int label, double* grad);
  int (*saliency_shape)(void* handle, size_t* maps, size_t* height, size_t* width);
  /* both buffers hold maps*height*width entries, plane by plane */
  int (*saliency_tensors)(void* handle, const veritas_image_view* img, int target,
                          double* activations, double* gradients);

  /* embedder */
  size_t (*embedding_dim)(void* handle);
  int (*embed_image)(void* handle, const veritas_image_view* img, double* out);
  int (*embed_text)(void* handle, const char* text, double* out);

  /* super-resolver; out holds (factor*H) x (factor*W) x C entries */
  int (*super_resolve)(void* handle, const veritas_image_view* img, int factor, double* out);

  /* vlm; on VERITAS_STATUS_BUFFER_TOO_SMALL, *out_len holds the needed size */
  int (*vlm_generate)(void* handle, const char* prompt, const veritas_image_view* img, char* out,
                      size_t capacity, size_t* out_len);
} veritas_plugin_v1;

typedef const veritas_plugin_v1* (*veritas_plugin_entry_fn)(void);

#ifdef __cplusplus
}
#endif

#endif /* VERITAS_PLUGIN_ABI_H */
