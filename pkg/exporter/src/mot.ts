/** MOT detection file parsing: frame,id,x,y,w,h[,conf,...] rows, 1-based frames. */
import { readFileSync } from 'node:fs'
import { Box } from './crop.js'

export interface DetRow {
  frame: number
  sourceIndex: number
  box: Box
  confidence: number
}

export function readDetections(path: string): DetRow[] {
  const text = readFileSync(path, 'utf8')
  const rows: DetRow[] = []
  const perFrame = new Map<number, number>()
  const lines = text.split(/\r?\n/)
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim()
    if (!line) continue
    const parts = line.split(',').map((p) => p.trim())
    if (parts.length < 6) {
      throw new Error(`line ${i + 1}: expected at least 6 fields, got ${parts.length}`)
    }
    const nums = parts.slice(0, 7).map(Number)
    if (nums.slice(0, 6).some((n) => !Number.isFinite(n))) {
      throw new Error(`line ${i + 1}: bad number`)
    }
    const frame = Math.trunc(nums[0])
    const [x, y, w, h] = nums.slice(2, 6)
    if (frame < 1) throw new Error(`line ${i + 1}: frame must be >= 1`)
    if (w <= 0 || h <= 0) throw new Error(`line ${i + 1}: non-positive box size`)
    const sourceIndex = perFrame.get(frame) ?? 0
    perFrame.set(frame, sourceIndex + 1)
    rows.push({
      frame,
      sourceIndex,
      box: { x, y, w, h },
      confidence: parts.length > 6 && Number.isFinite(nums[6]) ? nums[6] : 1.0,
    })
  }
  return rows
}
