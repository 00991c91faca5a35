/**
 * Embedding model interface and the built-in deterministic stubs.
 *
 * Real re-identification networks are user-supplied: pass a path to a JS
 * module whose default export (or `createModel`) returns an EmbeddingModel.
 * The stubs exist so exports are testable without any weights:
 *
 *   stub:constant[:dim]  every crop maps to the same unit vector
 *   stub:moments[:dim]   grid-cell color moments of the crop (distinct crops
 *                        get distinct embeddings), deterministic
 */
import { pathToFileURL } from 'node:url'
import { CropResult } from './crop.js'

export interface EmbeddingModel {
  dim: number
  /** One output vector (length `dim`) per input crop. */
  embed(batch: CropResult[]): Float32Array[]
}

const DEFAULT_DIM = 32

export class ConstantStub implements EmbeddingModel {
  constructor(public dim: number = DEFAULT_DIM) {}

  embed(batch: CropResult[]): Float32Array[] {
    return batch.map(() => {
      const v = new Float32Array(this.dim)
      v.fill(1)
      return v
    })
  }
}

export class MomentsStub implements EmbeddingModel {
  constructor(public dim: number = DEFAULT_DIM) {}

  embed(batch: CropResult[]): Float32Array[] {
    return batch.map((crop) => {
      // per-cell per-channel means over a grid sized to fill `dim`
      const cells = Math.ceil(this.dim / 3)
      const rows = Math.max(1, Math.round(Math.sqrt(cells)))
      const cols = Math.max(1, Math.ceil(cells / rows))
      const v = new Float32Array(this.dim)
      const cellH = crop.height / rows
      const cellW = crop.width / cols
      let k = 0
      outer: for (let r = 0; r < rows; r++) {
        for (let c = 0; c < cols; c++) {
          const y0 = Math.floor(r * cellH)
          const y1 = Math.max(y0 + 1, Math.floor((r + 1) * cellH))
          const x0 = Math.floor(c * cellW)
          const x1 = Math.max(x0 + 1, Math.floor((c + 1) * cellW))
          const sums = [0, 0, 0]
          let n = 0
          for (let y = y0; y < y1; y++) {
            for (let x = x0; x < x1; x++) {
              for (let ch = 0; ch < 3; ch++) {
                sums[ch] += crop.pixels[(y * crop.width + x) * 3 + ch]
              }
              n++
            }
          }
          for (let ch = 0; ch < 3; ch++) {
            if (k >= this.dim) break outer
            v[k++] = sums[ch] / n
          }
        }
      }
      return v
    })
  }
}

export async function loadModel(ref: string): Promise<EmbeddingModel> {
  if (ref.startsWith('stub:')) {
    const [, kind, dimStr] = ref.split(':')
    const dim = dimStr ? Number(dimStr) : DEFAULT_DIM
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`bad stub dimension in '${ref}'`)
    }
    if (kind === 'constant') return new ConstantStub(dim)
    if (kind === 'moments') return new MomentsStub(dim)
    throw new Error(`unknown stub '${kind}' (have: constant, moments)`)
  }
  let mod
  try {
    mod = await import(pathToFileURL(ref).href)
  } catch (err) {
    throw new Error(`failed to load model module '${ref}': ${(err as Error).message}`)
  }
  const factory = mod.createModel ?? mod.default
  if (typeof factory !== 'function') {
    throw new Error(`model module '${ref}' must export createModel() or a default factory`)
  }
  const model = await factory()
  if (!model || typeof model.embed !== 'function' || !Number.isInteger(model.dim)) {
    throw new Error(`model from '${ref}' does not implement the EmbeddingModel interface`)
  }
  return model
}
