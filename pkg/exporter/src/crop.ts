/** Detection crops: clamp to image bounds, then bilinear-resize. */
import { Image } from './ppm.js'

export interface CropResult {
  /** RGB float32 in [0,1], row-major, length = outH * outW * 3 */
  pixels: Float32Array
  height: number
  width: number
}

export interface Box {
  x: number
  y: number
  w: number
  h: number
}

/** Intersect a box with the image; returns null when nothing is left. */
export function clampBox(box: Box, imgW: number, imgH: number): Box | null {
  const x1 = Math.max(0, Math.floor(box.x))
  const y1 = Math.max(0, Math.floor(box.y))
  const x2 = Math.min(imgW, Math.ceil(box.x + box.w))
  const y2 = Math.min(imgH, Math.ceil(box.y + box.h))
  if (x2 - x1 <= 0 || y2 - y1 <= 0) return null
  return { x: x1, y: y1, w: x2 - x1, h: y2 - y1 }
}

/** Crop `box` (already clamped) and bilinear-resize to outH x outW. */
export function cropResize(img: Image, box: Box, outH: number, outW: number): CropResult {
  const out = new Float32Array(outH * outW * 3)
  const sx = box.w / outW
  const sy = box.h / outH
  for (let oy = 0; oy < outH; oy++) {
    // sample at pixel centers of the source region
    const fy = box.y + (oy + 0.5) * sy - 0.5
    const y0 = Math.max(box.y, Math.min(box.y + box.h - 1, Math.floor(fy)))
    const y1 = Math.min(box.y + box.h - 1, y0 + 1)
    const wy = Math.min(1, Math.max(0, fy - y0))
    for (let ox = 0; ox < outW; ox++) {
      const fx = box.x + (ox + 0.5) * sx - 0.5
      const x0 = Math.max(box.x, Math.min(box.x + box.w - 1, Math.floor(fx)))
      const x1 = Math.min(box.x + box.w - 1, x0 + 1)
      const wx = Math.min(1, Math.max(0, fx - x0))
      for (let c = 0; c < 3; c++) {
        const p00 = img.data[(y0 * img.width + x0) * 3 + c]
        const p01 = img.data[(y0 * img.width + x1) * 3 + c]
        const p10 = img.data[(y1 * img.width + x0) * 3 + c]
        const p11 = img.data[(y1 * img.width + x1) * 3 + c]
        const top = p00 * (1 - wx) + p01 * wx
        const bottom = p10 * (1 - wx) + p11 * wx
        out[(oy * outW + ox) * 3 + c] = (top * (1 - wy) + bottom * wy) / 255
      }
    }
  }
  return { pixels: out, height: outH, width: outW }
}
