/**
 * GEMB embedding sidecar, little-endian:
 *   magic "GEMB", u32 version=1, u32 dim, u64 count,
 *   then count records of (u32 frame, u32 source_index, dim x f32).
 */
export interface GembRecord {
  frame: number
  sourceIndex: number
  vector: Float32Array
}

const MAGIC = 'GEMB'

export function encodeGemb(dim: number, records: GembRecord[]): Buffer {
  const recordSize = 8 + 4 * dim
  const buf = Buffer.alloc(20 + recordSize * records.length)
  buf.write(MAGIC, 0, 'ascii')
  buf.writeUInt32LE(1, 4)
  buf.writeUInt32LE(dim, 8)
  buf.writeBigUInt64LE(BigInt(records.length), 12)
  let offset = 20
  const sorted = [...records].sort(
    (a, b) => a.frame - b.frame || a.sourceIndex - b.sourceIndex,
  )
  for (const rec of sorted) {
    if (rec.vector.length !== dim) {
      throw new Error(
        `record (${rec.frame}, ${rec.sourceIndex}) has dim ${rec.vector.length}, expected ${dim}`,
      )
    }
    buf.writeUInt32LE(rec.frame, offset)
    buf.writeUInt32LE(rec.sourceIndex, offset + 4)
    offset += 8
    for (let i = 0; i < dim; i++) {
      buf.writeFloatLE(rec.vector[i], offset)
      offset += 4
    }
  }
  return buf
}

export function decodeGemb(buf: Buffer): { dim: number; records: GembRecord[] } {
  if (buf.length < 20) throw new Error('truncated header')
  if (buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(buf.toString('ascii', 0, 4))}`)
  }
  const version = buf.readUInt32LE(4)
  if (version !== 1) throw new Error(`unsupported version ${version}`)
  const dim = buf.readUInt32LE(8)
  const count = Number(buf.readBigUInt64LE(12))
  const recordSize = 8 + 4 * dim
  if (buf.length - 20 !== count * recordSize) {
    throw new Error(`expected ${count * recordSize} record bytes, found ${buf.length - 20}`)
  }
  const records: GembRecord[] = []
  const seen = new Set<string>()
  let offset = 20
  for (let r = 0; r < count; r++) {
    const frame = buf.readUInt32LE(offset)
    const sourceIndex = buf.readUInt32LE(offset + 4)
    offset += 8
    const vector = new Float32Array(dim)
    for (let i = 0; i < dim; i++) {
      vector[i] = buf.readFloatLE(offset)
      offset += 4
    }
    const key = `${frame}:${sourceIndex}`
    if (seen.has(key)) throw new Error(`duplicate record ${key}`)
    seen.add(key)
    records.push({ frame, sourceIndex, vector })
  }
  return { dim, records }
}
