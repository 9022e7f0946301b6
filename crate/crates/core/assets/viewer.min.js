(async()=>{let t="# APOLLO 11 LUNAR MODULE CODE\n\n";for(let[k,v]of S)t+=`# --- ${k} ---\n${v}\n\n`;t+="# Decompressed core:\n";try{if(B)t+=(await new Response((await fetch("data:;base64,"+B)).body.pipeThrough(new DecompressionStream("deflate-raw"))).text()).replace(/[^ \t\n\r\f]+/g,w=>w[0]==E?w.slice(1):w.length<2&&D[w]||w)}catch(e){t+="[no deflate-raw support]"}o.textContent=t})()