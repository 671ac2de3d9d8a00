/** Minimal end-to-end run: one hybrid-classifier epoch from TypeScript. */

import { CoreClient } from "./client.js";
import { trainHqcnnEpoch } from "./train.js";

async function main(): Promise<void> {
  const client = await CoreClient.connect();
  try {
    const losses = await trainHqcnnEpoch(client);
    losses.forEach((loss, i) => {
      console.log(`batch ${i + 1}  loss ${loss.toFixed(4)}`);
    });
  } finally {
    client.close();
  }
}

main().catch((error) => {
  console.error(error);
  process.exitCode = 1;
});
