/**
 * The export pipeline: detections -> clamped crops -> batched model calls ->
 * L2-normalized vectors -> one .gemb sidecar, written atomically.
 */
import { existsSync, renameSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'
import { clampBox, cropResize } from './crop.js'
import { encodeGemb, GembRecord } from './gemb.js'
import { EmbeddingModel } from './model.js'
import { readDetections } from './mot.js'
import { Image, loadImage } from './ppm.js'

export interface ExportJob {
  framesDir: string
  detFile: string
  model: EmbeddingModel
  /** crop is resized to [height, width]; re-id convention is 384 x 128 */
  inputSize?: [number, number]
  batchSize?: number
  outPath: string
  log?: (msg: string) => void
}

export interface ExportSummary {
  written: number
  skippedZeroArea: number
  frames: number
}

const FRAME_EXTENSIONS = ['.ppm', '.pgm']

export function framePath(framesDir: string, frame: number): string {
  const stem = String(frame).padStart(6, '0')
  for (const ext of FRAME_EXTENSIONS) {
    const candidate = join(framesDir, stem + ext)
    if (existsSync(candidate)) return candidate
  }
  throw new Error(`no frame image for frame ${frame} under ${framesDir} (looked for ${stem}.ppm/.pgm)`)
}

function l2Normalize(v: Float32Array): Float32Array {
  let sum = 0
  for (const x of v) sum += x * x
  const norm = Math.sqrt(sum)
  if (norm < 1e-12) throw new Error('model produced a zero vector')
  const out = new Float32Array(v.length)
  for (let i = 0; i < v.length; i++) out[i] = v[i] / norm
  return out
}

export function runExport(job: ExportJob): ExportSummary {
  const [inH, inW] = job.inputSize ?? [384, 128]
  const batchSize = job.batchSize ?? 32
  const log = job.log ?? (() => {})
  const detections = readDetections(job.detFile)

  const byFrame = new Map<number, typeof detections>()
  for (const det of detections) {
    const list = byFrame.get(det.frame) ?? []
    list.push(det)
    byFrame.set(det.frame, list)
  }

  const records: GembRecord[] = []
  let skipped = 0
  const pending: { frame: number; sourceIndex: number; crop: ReturnType<typeof cropResize> }[] = []

  const flush = () => {
    if (!pending.length) return
    const vectors = job.model.embed(pending.map((p) => p.crop))
    if (vectors.length !== pending.length) {
      throw new Error(`model returned ${vectors.length} vectors for ${pending.length} crops`)
    }
    for (let i = 0; i < pending.length; i++) {
      records.push({
        frame: pending[i].frame,
        sourceIndex: pending[i].sourceIndex,
        vector: l2Normalize(vectors[i]),
      })
    }
    pending.length = 0
  }

  const frames = [...byFrame.keys()].sort((a, b) => a - b)
  for (const frame of frames) {
    let image: Image
    image = loadImage(framePath(job.framesDir, frame))
    for (const det of byFrame.get(frame)!) {
      const clamped = clampBox(det.box, image.width, image.height)
      if (clamped === null) {
        skipped++
        log(`frame ${frame} det ${det.sourceIndex}: crop has zero area after clamping, skipped`)
        continue
      }
      pending.push({ frame, sourceIndex: det.sourceIndex, crop: cropResize(image, clamped, inH, inW) })
      if (pending.length >= batchSize) flush()
    }
  }
  flush()

  const payload = encodeGemb(job.model.dim, records)
  const tmp = job.outPath + '.tmp'
  writeFileSync(tmp, payload)
  renameSync(tmp, job.outPath)
  return { written: records.length, skippedZeroArea: skipped, frames: frames.length }
}
